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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "acnfa/background.hpp"
#include "acnfa/image.hpp"
#include "acnfa/nfa.hpp"

namespace acnfa {

struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;  // row-major, 0 or 1

  bool at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)] != 0;
  }
  std::size_t count() const;
};

/// Pixels of one connected component, in raster order.
using Component = std::vector<PixelCoord>;

struct Detection {
  Box box;
  /// Minimum log10 NFA over the component.
  double log10_nfa = 0.0;
  /// sigm_alpha(-log10_nfa, alpha, tau).
  double score = 0.0;
  std::int64_t pixel_count = 0;
  /// Location of the minimum-NFA pixel (first in raster order on ties).
  PixelCoord peak;
};

struct DetectConfig {
  BackgroundMethod method = BackgroundMethod::empirical;
  double ridge = kDefaultRidge;
  double epsilon = 1.0;
  int connectivity = 8;
  double alpha = 1.0;
  double tau = 0.0;
  /// Pyramid levels including full resolution; 1 disables the pyramid.
  int scales = 1;
  /// One weight per scale; empty means all ones.
  std::vector<double> scale_weights;
  TailMode tail = TailMode::two_sided;
  /// Known background model used instead of per-image estimation.
  std::optional<BackgroundModel> background;

  /// Throws InvalidArgument on out-of-range parameters.
  void validate() const;
};

struct DetectOutput {
  std::vector<Detection> detections;
  /// Fused log10 NFA on the full-resolution grid.
  NfaMap nfa;
};

/// Pixels whose NFA is <= epsilon.
Mask threshold_mask(const NfaMap& nfa, double epsilon);

/// Maximal 4- or 8-connected sets of true pixels, ordered by their first pixel
/// in raster order (i.e. by min row, then min col on that row).
std::vector<Component> connected_components(const Mask& mask, int connectivity = 8);

/// Tight boxes with aggregate NFA = component minimum, sorted by ascending
/// NFA (component order breaks ties).
std::vector<Detection> components_to_detections(std::span<const Component> components,
                                                const NfaMap& nfa, double alpha = 1.0,
                                                double tau = 0.0);

/// 2x decimation by 2x2 block averaging; odd trailing rows/cols are dropped.
ImageTensor decimate2x(const ImageTensor& image);

/// background -> NFA map (-> pyramid + fusion) -> threshold -> components ->
/// detections.
DetectOutput run_detection(const ImageTensor& image, const DetectConfig& config);

std::vector<Detection> detect(const ImageTensor& image, const DetectConfig& config);

}  // namespace acnfa
