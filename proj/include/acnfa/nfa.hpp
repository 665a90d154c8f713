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
#include <vector>

#include "acnfa/background.hpp"
#include "acnfa/image.hpp"

namespace acnfa {

/// Per-pixel NFA, stored as log10(NFA) so tails far below 1e-308 stay
/// representable. Every entry is <= log10(eta_test); an exactly zero tail is
/// stored as -infinity.
struct NfaMap {
  int height = 0;
  int width = 0;
  double eta_test = 1.0;
  std::vector<double> log10_nfa;  // row-major

  double at(int row, int col) const {
    return log10_nfa[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(col)];
  }
};

/// Per-pixel significance S = -log10(NFA).
struct SignificanceMap {
  int height = 0;
  int width = 0;
  double eta_test = 1.0;
  std::vector<double> values;  // row-major

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

enum class TailMode {
  /// Mahalanobis-norm tail, eta_test * Q(K/2, m^2/2).
  two_sided,
  /// K = 1 only: upper tail 1 - Phi(z) for bright targets.
  one_sided_bright,
};

/// log10 NFA of one pixel with squared Mahalanobis norm `m_sq` in K channels.
double log10_nfa_gaussian(double m_sq, int channels, double eta_test);

/// log10 NFA of a whitened K=1 value z under the one-sided test.
double log10_nfa_one_sided(double z, double eta_test);

/// NFA(x) = eta_test * Q(K/2, ||L^{-1}(x - mean)||^2 / 2) for every pixel,
/// with eta_test taken from the model.
NfaMap nfa_gaussian_map(const ImageTensor& image, const BackgroundModel& model,
                        TailMode tail = TailMode::two_sided);

SignificanceMap significance_map(const NfaMap& nfa);

/// Inverse of significance_map.
NfaMap nfa_from_significance(const SignificanceMap& significance);

/// Objectness score logistic(alpha * (s - tau)), in [0, 1].
double sigm_alpha(double significance, double alpha = 1.0, double tau = 0.0);

/// n_tests * P(Bin(n, p) >= k).
double nfa_binomial(std::int64_t k, std::int64_t n, double p, double n_tests);

/// log10 of nfa_binomial; -infinity for impossible events (k > n, ...).
double log10_nfa_binomial(std::int64_t k, std::int64_t n, double p, double n_tests);

struct FusedSignificance {
  SignificanceMap significance;
  /// Index of the scale attaining the weighted maximum (lowest index on ties).
  std::vector<std::uint8_t> winning_scale;
};

/// Weighted max fusion: S(p) = max_l weights[l] * S_l(p), each map being
/// sampled nearest-neighbor onto the target grid first.
FusedSignificance fuse_scales(std::span<const SignificanceMap> maps,
                              std::span<const double> weights, int height, int width);

}  // namespace acnfa
