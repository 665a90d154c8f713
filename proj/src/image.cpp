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

#include "acnfa/image.hpp"

#include <cmath>
#include <string>

#include "acnfa/error.hpp"

namespace acnfa {
namespace {

void check_shape(int height, int width, int channels) {
  if (height < 1 || width < 1 || channels < 1) {
    throw InvalidArgument("image shape must be positive, got " + std::to_string(height) + "x" +
                          std::to_string(width) + "x" + std::to_string(channels));
  }
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_shape(height, width, channels);
  if (!std::isfinite(fill)) throw InvalidArgument("image fill value must be finite");
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_shape(height, width, channels);
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw DimensionError("image data has " + std::to_string(data_.size()) +
                         " values, expected " +
                         std::to_string(pixel_count() * static_cast<std::size_t>(channels)));
  }
  require_finite();
}

void ImageTensor::require_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("image contains a non-finite value");
  }
}

}  // namespace acnfa
