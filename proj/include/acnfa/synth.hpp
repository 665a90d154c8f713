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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "acnfa/eval.hpp"
#include "acnfa/image.hpp"

namespace acnfa {

enum class TargetProfile { point, gaussian_blob };

/// Largest blob radius whose disk support stays under 80 pixels (49 at r=4).
inline constexpr int kMaxBlobRadius = 4;

/// i.i.d. K-variate Gaussian pixels mean + A z, A A^T = cov from an eigen
/// decomposition (so singular PSD covariances work), z from Rng(seed).
/// Pixels are drawn in raster order, channels innermost.
ImageTensor gen_noise_image(int height, int width, int channels, std::span<const double> mean,
                            const Eigen::MatrixXd& cov, std::uint64_t seed);

/// Adds a bright target in place and returns its ground-truth box (image_id
/// left empty). `sigma` holds the background standard deviation per channel;
/// the bump is amplitude * sigma[k] at the center.
///
/// point: one pixel. gaussian_blob: amplitude * sigma * exp(-r^2 / (2 (radius/2)^2))
/// on the disk r <= radius, clipped to the image; radius 0 degenerates to a point.
GroundTruthBox inject_target(ImageTensor& image, PixelCoord center, double amplitude, int radius,
                             TargetProfile profile, std::span<const double> sigma);

struct SceneParams {
  int height = 256;
  int width = 256;
  int channels = 1;
  std::vector<double> mean{0.0};
  Eigen::MatrixXd covariance = Eigen::MatrixXd::Identity(1, 1);
  int targets_min = 1;
  int targets_max = 1;
  double amplitude = 5.0;
  int radius = 2;
  TargetProfile profile = TargetProfile::gaussian_blob;

  void validate() const;
};

struct SynthScene {
  std::string image_id;
  ImageTensor image;
  std::vector<GroundTruthBox> gts;
  /// 255 on the support of every target, 0 elsewhere.
  ImageTensor mask;
  std::uint64_t seed = 0;
  SceneParams params;
};

/// "img_00042" style id for a dataset index.
std::string scene_id(std::size_t index);

/// One scene: noise from Rng(seed), target count and centers from a second
/// stream Rng(derive_seed(seed, 1)). Centers keep `radius` pixels from the
/// border and boxes of distinct targets never touch.
SynthScene gen_scene(const SceneParams& params, std::uint64_t seed, std::string image_id);

/// Scene i uses seed derive_seed(master_seed, i) and id scene_id(i).
std::vector<SynthScene> gen_dataset(std::size_t n_images, const SceneParams& params,
                                    std::uint64_t master_seed);

/// FNV-1a 64 over ids, image values and ground-truth boxes.
std::uint64_t dataset_hash(std::span<const SynthScene> scenes);

}  // namespace acnfa
