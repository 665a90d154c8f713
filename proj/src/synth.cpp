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

#include "acnfa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>

#include "acnfa/error.hpp"
#include "acnfa/hash.hpp"
#include "acnfa/random.hpp"

namespace acnfa {
namespace {

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  const auto k = cov.rows();
  if (cov.cols() != k) throw DimensionError("covariance must be square");
  if (!cov.allFinite()) throw InvalidArgument("covariance must be finite");
  const double magnitude = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * magnitude) {
    throw InvalidArgument("covariance must be symmetric");
  }
  if (cov.isZero(0.0)) return Eigen::MatrixXd::Zero(k, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd values = eig.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -tol) throw InvalidArgument("covariance is not positive semidefinite");
  return eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::vector<double> channel_sigma(const Eigen::MatrixXd& cov) {
  std::vector<double> s(static_cast<std::size_t>(cov.rows()));
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    s[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, cov(i, i)));
  }
  return s;
}

// Calls fn(row, col, squared distance) for every in-image pixel of the disk
// d^2 <= radius^2 around center.
template <typename Fn>
void for_each_support_pixel(int height, int width, PixelCoord center, int radius, Fn&& fn) {
  const int r2max = radius * radius;
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      const int d2 = dr * dr + dc * dc;
      if (d2 > r2max) continue;
      const int r = center.row + dr;
      const int c = center.col + dc;
      if (r < 0 || c < 0 || r >= height || c >= width) continue;
      fn(r, c, d2);
    }
  }
}

}  // namespace

ImageTensor gen_noise_image(int height, int width, int channels, std::span<const double> mean,
                            const Eigen::MatrixXd& cov, std::uint64_t seed) {
  if (mean.size() != static_cast<std::size_t>(channels) || cov.rows() != channels) {
    throw DimensionError("mean and covariance must match the channel count");
  }
  const Eigen::MatrixXd factor = psd_factor(cov);
  ImageTensor image(height, width, channels);
  Rng rng(seed);
  std::vector<double> z(static_cast<std::size_t>(channels));
  auto values = image.data();
  const std::size_t n = image.pixel_count();
  for (std::size_t p = 0; p < n; ++p) {
    for (double& v : z) v = rng.normal();
    for (int c = 0; c < channels; ++c) {
      double x = mean[static_cast<std::size_t>(c)];
      for (int j = 0; j < channels; ++j) x += factor(c, j) * z[static_cast<std::size_t>(j)];
      values[p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] = x;
    }
  }
  return image;
}

GroundTruthBox inject_target(ImageTensor& image, PixelCoord center, double amplitude, int radius,
                             TargetProfile profile, std::span<const double> sigma) {
  if (center.row < 0 || center.col < 0 || center.row >= image.height() ||
      center.col >= image.width()) {
    throw InvalidArgument("inject_target: center out of bounds");
  }
  if (sigma.size() != static_cast<std::size_t>(image.channels())) {
    throw DimensionError("inject_target: one sigma per channel required");
  }
  if (!std::isfinite(amplitude)) throw InvalidArgument("inject_target: amplitude must be finite");
  if (radius < 0 || radius > kMaxBlobRadius) {
    throw InvalidArgument("inject_target: radius must lie in [0, 4] (80-pixel extent bound)");
  }
  const int k = image.channels();
  GroundTruthBox gt;
  gt.box = {center.col, center.row, center.col, center.row};
  gt.extent = 0;
  const bool point = profile == TargetProfile::point || radius == 0;
  const double spread = 0.5 * radius;
  const double denom = 2.0 * spread * spread;
  for_each_support_pixel(image.height(), image.width(), center, point ? 0 : radius,
                         [&](int r, int c, int d2) {
                           const double profile_value =
                               point ? 1.0 : std::exp(-static_cast<double>(d2) / denom);
                           for (int ch = 0; ch < k; ++ch) {
                             image.at(r, c, ch) +=
                                 amplitude * sigma[static_cast<std::size_t>(ch)] * profile_value;
                           }
                           gt.box.x_min = std::min(gt.box.x_min, c);
                           gt.box.x_max = std::max(gt.box.x_max, c);
                           gt.box.y_min = std::min(gt.box.y_min, r);
                           gt.box.y_max = std::max(gt.box.y_max, r);
                           ++gt.extent;
                         });
  return gt;
}

void SceneParams::validate() const {
  if (height < 1 || width < 1 || channels < 1) throw InvalidArgument("scene size must be positive");
  if (mean.size() != static_cast<std::size_t>(channels) || covariance.rows() != channels ||
      covariance.cols() != channels) {
    throw DimensionError("scene mean/covariance must match the channel count");
  }
  if (targets_min < 0 || targets_max < targets_min) {
    throw InvalidArgument("targets per image: need 0 <= min <= max");
  }
  if (radius < 0 || radius > kMaxBlobRadius) throw InvalidArgument("radius must lie in [0, 4]");
  if (!std::isfinite(amplitude)) throw InvalidArgument("amplitude must be finite");
  if (targets_max > 0 && (height <= 2 * radius || width <= 2 * radius)) {
    throw InvalidArgument("scene too small for targets of this radius");
  }
}

std::string scene_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%05zu", index);
  return buf;
}

SynthScene gen_scene(const SceneParams& params, std::uint64_t seed, std::string image_id) {
  params.validate();
  SynthScene scene;
  scene.image_id = std::move(image_id);
  scene.seed = seed;
  scene.params = params;
  scene.image = gen_noise_image(params.height, params.width, params.channels, params.mean,
                                params.covariance, seed);

  Rng placement(derive_seed(seed, 1));
  const int span_targets = params.targets_max - params.targets_min + 1;
  const int n_targets =
      params.targets_min + static_cast<int>(placement.below(static_cast<std::uint64_t>(span_targets)));
  const int margin = params.profile == TargetProfile::point ? 0 : params.radius;
  const int rows = params.height - 2 * margin;
  const int cols = params.width - 2 * margin;
  // Centers closer than this (Chebyshev) would give touching boxes.
  const int min_gap = 2 * margin + 2;
  const auto sigma = channel_sigma(params.covariance);

  std::vector<PixelCoord> centers;
  for (int t = 0; t < n_targets; ++t) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const PixelCoord c{margin + static_cast<int>(placement.below(static_cast<std::uint64_t>(rows))),
                         margin + static_cast<int>(placement.below(static_cast<std::uint64_t>(cols)))};
      placed = std::all_of(centers.begin(), centers.end(), [&](const PixelCoord& o) {
        return std::max(std::abs(o.row - c.row), std::abs(o.col - c.col)) >= min_gap;
      });
      if (placed) centers.push_back(c);
    }
    if (!placed) throw InvalidArgument("could not place non-overlapping targets; scene too crowded");
  }
  scene.mask = ImageTensor(params.height, params.width, 1);
  const int support_radius = params.profile == TargetProfile::point ? 0 : params.radius;
  for (const auto& c : centers) {
    GroundTruthBox gt = inject_target(scene.image, c, params.amplitude, params.radius,
                                      params.profile, sigma);
    gt.image_id = scene.image_id;
    scene.gts.push_back(std::move(gt));
    for_each_support_pixel(params.height, params.width, c, support_radius,
                           [&](int r, int col, int) { scene.mask.at(r, col) = 255.0; });
  }
  return scene;
}

std::vector<SynthScene> gen_dataset(std::size_t n_images, const SceneParams& params,
                                    std::uint64_t master_seed) {
  params.validate();
  std::vector<SynthScene> scenes;
  scenes.reserve(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    scenes.push_back(gen_scene(params, derive_seed(master_seed, i), scene_id(i)));
  }
  return scenes;
}

std::uint64_t dataset_hash(std::span<const SynthScene> scenes) {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : scenes) {
    h = fnv1a64(s.image_id, h);
    h = fnv1a64(&s.seed, sizeof s.seed, h);
    const auto values = s.image.data();
    h = fnv1a64(values.data(), values.size_bytes(), h);
    for (const auto& g : s.gts) {
      h = fnv1a64(&g.box, sizeof g.box, h);
      h = fnv1a64(&g.extent, sizeof g.extent, h);
    }
  }
  return h;
}

}  // namespace acnfa
