// Copyright 2026 The acnfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace acnfa {

/// H x W x K array of real intensities.
///
/// Storage is row-major and channel-interleaved: the value of channel k at
/// (row, col) lives at ((row * width) + col) * channels + k.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, double fill = 0.0);
  /// Takes ownership of `data`; throws if the size does not match or a value
  /// is not finite.
  ImageTensor(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const { return data_.empty(); }

  double at(int row, int col, int channel = 0) const { return data_[index(row, col, channel)]; }
  double& at(int row, int col, int channel = 0) { return data_[index(row, col, channel)]; }

  std::span<const double> pixel(int row, int col) const {
    return {data_.data() + index(row, col, 0), static_cast<std::size_t>(channels_)};
  }
  std::span<const double> pixel(std::size_t flat) const {
    return {data_.data() + flat * static_cast<std::size_t>(channels_),
            static_cast<std::size_t>(channels_)};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Throws InvalidArgument if any value is NaN or infinite.
  void require_finite() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t index(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(channel);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Row/column position on a pixel grid.
struct PixelCoord {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

/// Axis-aligned box with inclusive, zero-based pixel coordinates; x is the
/// column axis and y the row axis.
struct Box {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  bool valid() const { return x_min <= x_max && y_min <= y_max; }
  long long area() const {
    return static_cast<long long>(x_max - x_min + 1) * static_cast<long long>(y_max - y_min + 1);
  }
  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace acnfa
