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

#include "acnfa/nfa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "acnfa/error.hpp"
#include "acnfa/special_functions.hpp"

namespace acnfa {
namespace {

constexpr double kLn10 = 2.302585092994045684017991454684;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_eta(double eta_test) {
  if (!(eta_test >= 1.0) || !std::isfinite(eta_test)) {
    throw InvalidArgument("eta_test must be a finite count >= 1");
  }
}

// Nearest-neighbor source index of `dst` when stretching `src_len` onto `dst_len`.
int nearest_source(int dst, int dst_len, int src_len) {
  const long long idx = static_cast<long long>(dst) * src_len / dst_len;
  return static_cast<int>(std::min<long long>(idx, src_len - 1));
}

}  // namespace

double log10_nfa_gaussian(double m_sq, int channels, double eta_test) {
  check_eta(eta_test);
  if (channels < 1) throw InvalidArgument("channel count must be >= 1");
  if (!(m_sq >= 0.0)) throw DomainError("squared Mahalanobis norm must be >= 0");
  const double log_tail = log_reg_upper_gamma_q(0.5 * channels, 0.5 * m_sq);
  return std::log10(eta_test) + std::fmin(log_tail, 0.0) / kLn10;
}

double log10_nfa_one_sided(double z, double eta_test) {
  check_eta(eta_test);
  if (std::isnan(z)) throw DomainError("whitened value is NaN");
  if (z == std::numeric_limits<double>::infinity()) return kNegInf;
  // P(Z >= z) = Q(1/2, z^2/2) / 2 for z >= 0, and 1 minus that for z < 0.
  const double log_half_q = std::log(0.5) + log_reg_upper_gamma_q(0.5, 0.5 * z * z);
  const double log_tail = z >= 0.0 ? log_half_q : std::log1p(-std::exp(log_half_q));
  return std::log10(eta_test) + std::fmin(log_tail, 0.0) / kLn10;
}

NfaMap nfa_gaussian_map(const ImageTensor& image, const BackgroundModel& model, TailMode tail) {
  if (model.degenerate()) {
    throw DegenerateModelError("cannot compute NFA: background model is degenerate");
  }
  if (image.channels() != model.channels()) {
    throw DimensionError("image has " + std::to_string(image.channels()) +
                         " channels, model has " + std::to_string(model.channels()));
  }
  if (tail == TailMode::one_sided_bright && model.channels() != 1) {
    throw InvalidArgument("one-sided test is only defined for single-channel input");
  }
  NfaMap map;
  map.height = image.height();
  map.width = image.width();
  map.eta_test = model.eta_test();
  const std::size_t n = image.pixel_count();
  map.log10_nfa.resize(n);

  const int k = model.channels();
  const double log10_eta = std::log10(model.eta_test());
  const double shape = 0.5 * k;
  for (std::size_t p = 0; p < n; ++p) {
    const auto px = image.pixel(p);
    if (tail == TailMode::one_sided_bright) {
      double z = 0.0;
      model.whiten(px, std::span<double>(&z, 1));
      map.log10_nfa[p] = log10_nfa_one_sided(z, model.eta_test());
    } else {
      const double m_sq = model.mahalanobis_sq(px);
      const double log_tail = log_reg_upper_gamma_q(shape, 0.5 * m_sq);
      map.log10_nfa[p] = log10_eta + std::fmin(log_tail, 0.0) / kLn10;
    }
  }
  return map;
}

SignificanceMap significance_map(const NfaMap& nfa) {
  SignificanceMap s;
  s.height = nfa.height;
  s.width = nfa.width;
  s.eta_test = nfa.eta_test;
  s.values.resize(nfa.log10_nfa.size());
  std::transform(nfa.log10_nfa.begin(), nfa.log10_nfa.end(), s.values.begin(),
                 [](double v) { return -v; });
  return s;
}

NfaMap nfa_from_significance(const SignificanceMap& significance) {
  NfaMap m;
  m.height = significance.height;
  m.width = significance.width;
  m.eta_test = significance.eta_test;
  m.log10_nfa.resize(significance.values.size());
  std::transform(significance.values.begin(), significance.values.end(), m.log10_nfa.begin(),
                 [](double v) { return -v; });
  return m;
}

double sigm_alpha(double significance, double alpha, double tau) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive");
  if (std::isnan(significance) || std::isnan(tau)) throw DomainError("sigm_alpha: NaN input");
  const double t = alpha * (significance - tau);
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// ln P(Bin(n, p) >= k); validates arguments.
double log_binomial_tail(std::int64_t k, std::int64_t n, double p, double n_tests) {
  if (n < 1) throw InvalidArgument("binomial NFA: n must be >= 1");
  if (k < 0) throw InvalidArgument("binomial NFA: k must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial NFA: p must lie in [0, 1]");
  if (!(n_tests > 0.0) || !std::isfinite(n_tests)) {
    throw InvalidArgument("binomial NFA: n_tests must be positive");
  }
  if (k == 0) return 0.0;
  if (k > n || p == 0.0) return kNegInf;
  if (p == 1.0) return 0.0;

  // Accumulate ln sum_{j>=k} pmf(j) from j = n downward; logaddexp never
  // decreases the running value, so the tail is monotone in k bit for bit.
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double ln_n_fact = ln_gamma(static_cast<double>(n) + 1.0);
  double acc = kNegInf;
  for (std::int64_t j = n; j >= k; --j) {
    const double jd = static_cast<double>(j);
    const double term = ln_n_fact - ln_gamma(jd + 1.0) -
                        ln_gamma(static_cast<double>(n - j) + 1.0) + jd * log_p +
                        static_cast<double>(n - j) * log_q;
    if (acc == kNegInf) {
      acc = term;
    } else {
      const double hi = std::max(acc, term);
      const double lo = std::min(acc, term);
      acc = hi + std::log1p(std::exp(lo - hi));
    }
  }
  return std::fmin(acc, 0.0);
}

}  // namespace

double log10_nfa_binomial(std::int64_t k, std::int64_t n, double p, double n_tests) {
  const double log_tail = log_binomial_tail(k, n, p, n_tests);
  return std::log10(n_tests) + log_tail / kLn10;
}

double nfa_binomial(std::int64_t k, std::int64_t n, double p, double n_tests) {
  const double log_tail = log_binomial_tail(k, n, p, n_tests);
  return log_tail == 0.0 ? n_tests : n_tests * std::exp(log_tail);
}

FusedSignificance fuse_scales(std::span<const SignificanceMap> maps,
                              std::span<const double> weights, int height, int width) {
  if (maps.empty()) throw InvalidArgument("fuse_scales: no maps given");
  if (weights.size() != maps.size()) {
    throw InvalidArgument("fuse_scales: expected " + std::to_string(maps.size()) +
                          " weights, got " + std::to_string(weights.size()));
  }
  if (maps.size() > 255) throw InvalidArgument("fuse_scales: at most 255 scales");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("fuse_scales: weights must be finite and positive");
    }
  }
  if (height < 1 || width < 1) throw InvalidArgument("fuse_scales: bad target size");
  for (const auto& m : maps) {
    if (m.height < 1 || m.width < 1 ||
        m.values.size() != static_cast<std::size_t>(m.height) * static_cast<std::size_t>(m.width)) {
      throw DimensionError("fuse_scales: malformed significance map");
    }
  }

  FusedSignificance out;
  out.significance.height = height;
  out.significance.width = width;
  out.significance.eta_test = maps.front().eta_test;
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  out.significance.values.assign(n, -std::numeric_limits<double>::infinity());
  out.winning_scale.assign(n, 0);

  for (std::size_t l = 0; l < maps.size(); ++l) {
    const auto& m = maps[l];
    const double w = weights[l];
    const bool same_grid = m.height == height && m.width == width;
    for (int r = 0; r < height; ++r) {
      const int sr = same_grid ? r : nearest_source(r, height, m.height);
      for (int c = 0; c < width; ++c) {
        const int sc = same_grid ? c : nearest_source(c, width, m.width);
        const double v = w == 1.0 ? m.at(sr, sc) : w * m.at(sr, sc);
        const std::size_t idx = static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                                static_cast<std::size_t>(c);
        if (l == 0 || v > out.significance.values[idx]) {
          out.significance.values[idx] = v;
          out.winning_scale[idx] = static_cast<std::uint8_t>(l);
        }
      }
    }
  }
  return out;
}

}  // namespace acnfa
