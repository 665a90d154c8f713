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

#include "acnfa/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "acnfa/error.hpp"

namespace acnfa {
namespace {

// Union-find over provisional labels of the two-pass labeling.
class LabelForest {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Keeps the smaller root so a root is always the earliest label in raster order.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

void DetectConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be > 0");
  if (connectivity != 4 && connectivity != 8) throw InvalidArgument("connectivity must be 4 or 8");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be > 0");
  if (!std::isfinite(tau)) throw InvalidArgument("tau must be finite");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be >= 0");
  if (scales < 1 || scales > 16) throw InvalidArgument("scales must be in [1, 16]");
  if (!scale_weights.empty() && scale_weights.size() != static_cast<std::size_t>(scales)) {
    throw InvalidArgument("scale_weights must have one entry per scale");
  }
  for (double w : scale_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("scale weights must be > 0");
  }
}

Mask threshold_mask(const NfaMap& nfa, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be > 0");
  const double cut = std::log10(epsilon);
  Mask mask;
  mask.height = nfa.height;
  mask.width = nfa.width;
  mask.values.resize(nfa.log10_nfa.size());
  std::transform(nfa.log10_nfa.begin(), nfa.log10_nfa.end(), mask.values.begin(),
                 [cut](double v) { return static_cast<std::uint8_t>(v <= cut ? 1 : 0); });
  return mask;
}

std::vector<Component> connected_components(const Mask& mask, int connectivity) {
  if (connectivity != 4 && connectivity != 8) throw InvalidArgument("connectivity must be 4 or 8");
  const int h = mask.height;
  const int w = mask.width;
  std::vector<int> labels(mask.values.size(), -1);
  LabelForest forest;
  auto label_at = [&](int r, int c) {
    return labels[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                  static_cast<std::size_t>(c)];
  };

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.at(r, c)) continue;
      int current = -1;
      auto visit = [&](int nr, int nc) {
        if (nr < 0 || nc < 0 || nc >= w) return;
        const int l = label_at(nr, nc);
        if (l < 0) return;
        if (current < 0) {
          current = l;
        } else {
          forest.unite(current, l);
        }
      };
      visit(r, c - 1);
      visit(r - 1, c);
      if (connectivity == 8) {
        visit(r - 1, c - 1);
        visit(r - 1, c + 1);
      }
      if (current < 0) current = forest.make();
      labels[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
             static_cast<std::size_t>(c)] = current;
    }
  }

  // Roots are visited in raster order of their first pixel, which fixes the
  // output order.
  std::vector<int> slot_of_root;
  std::vector<Component> components;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int l = label_at(r, c);
      if (l < 0) continue;
      const int root = forest.find(l);
      if (static_cast<std::size_t>(root) >= slot_of_root.size()) {
        slot_of_root.resize(static_cast<std::size_t>(root) + 1, -1);
      }
      int& slot = slot_of_root[static_cast<std::size_t>(root)];
      if (slot < 0) {
        slot = static_cast<int>(components.size());
        components.emplace_back();
      }
      components[static_cast<std::size_t>(slot)].push_back({r, c});
    }
  }
  return components;
}

std::vector<Detection> components_to_detections(std::span<const Component> components,
                                                const NfaMap& nfa, double alpha, double tau) {
  std::vector<Detection> out;
  out.reserve(components.size());
  for (const auto& comp : components) {
    if (comp.empty()) continue;
    Detection d;
    d.box = {comp.front().col, comp.front().row, comp.front().col, comp.front().row};
    d.log10_nfa = nfa.at(comp.front().row, comp.front().col);
    d.peak = comp.front();
    for (const auto& p : comp) {
      if (p.row < 0 || p.col < 0 || p.row >= nfa.height || p.col >= nfa.width) {
        throw DimensionError("component pixel outside the NFA map");
      }
      d.box.x_min = std::min(d.box.x_min, p.col);
      d.box.x_max = std::max(d.box.x_max, p.col);
      d.box.y_min = std::min(d.box.y_min, p.row);
      d.box.y_max = std::max(d.box.y_max, p.row);
      const double v = nfa.at(p.row, p.col);
      if (v < d.log10_nfa) {
        d.log10_nfa = v;
        d.peak = p;
      }
    }
    d.pixel_count = static_cast<std::int64_t>(comp.size());
    d.score = sigm_alpha(-d.log10_nfa, alpha, tau);
    out.push_back(d);
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return a.log10_nfa < b.log10_nfa;
  });
  return out;
}

ImageTensor decimate2x(const ImageTensor& image) {
  const int h = image.height() / 2;
  const int w = image.width() / 2;
  if (h < 1 || w < 1) throw InvalidArgument("image too small to decimate");
  const int k = image.channels();
  ImageTensor out(h, w, k);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < k; ++ch) {
        out.at(r, c, ch) = 0.25 * (image.at(2 * r, 2 * c, ch) + image.at(2 * r, 2 * c + 1, ch) +
                                   image.at(2 * r + 1, 2 * c, ch) +
                                   image.at(2 * r + 1, 2 * c + 1, ch));
      }
    }
  }
  return out;
}

DetectOutput run_detection(const ImageTensor& image, const DetectConfig& config) {
  config.validate();
  if (image.empty()) throw InvalidArgument("detect: empty image");
  image.require_finite();

  const double eta_test = static_cast<double>(image.pixel_count());
  // eta_test is the pixel count of the image under test, also for a supplied model.
  BackgroundModel base = config.background
                             ? config.background->with_eta_test(eta_test)
                             : estimate_background(image, config.method, config.ridge);

  DetectOutput out;
  if (config.scales == 1 && (config.scale_weights.empty() || config.scale_weights[0] == 1.0)) {
    out.nfa = nfa_gaussian_map(image, base, config.tail);
  } else {
    // eta_test stays that of the full-resolution grid at every level.
    std::vector<SignificanceMap> levels;
    levels.push_back(significance_map(nfa_gaussian_map(image, base, config.tail)));
    ImageTensor current = image;
    double cov_scale = 1.0;
    for (int l = 1; l < config.scales; ++l) {
      current = decimate2x(current);
      cov_scale *= 0.25;
      const BackgroundModel level_model =
          config.background
              ? base.with_scaled_covariance(cov_scale)
              : estimate_background(current, config.method, config.ridge).with_eta_test(eta_test);
      levels.push_back(significance_map(nfa_gaussian_map(current, level_model, config.tail)));
    }
    std::vector<double> weights = config.scale_weights;
    if (weights.empty()) weights.assign(levels.size(), 1.0);
    out.nfa = nfa_from_significance(
        fuse_scales(levels, weights, image.height(), image.width()).significance);
  }

  const Mask mask = threshold_mask(out.nfa, config.epsilon);
  const auto components = connected_components(mask, config.connectivity);
  out.detections = components_to_detections(components, out.nfa, config.alpha, config.tau);
  return out;
}

std::vector<Detection> detect(const ImageTensor& image, const DetectConfig& config) {
  return run_detection(image, config).detections;
}

}  // namespace acnfa
