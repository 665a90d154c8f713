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

#include "acnfa/calibrate.hpp"

#include <cmath>

#include "acnfa/background.hpp"
#include "acnfa/detect.hpp"
#include "acnfa/error.hpp"
#include "acnfa/random.hpp"
#include "acnfa/synth.hpp"

namespace acnfa {

void CalibrationParams::validate() const {
  if (trials < 30) throw InvalidArgument("calibration needs at least 30 trials");
  if (sizes.empty() || epsilons.empty() || variants.empty()) {
    throw InvalidArgument("calibration needs at least one size, epsilon and variant");
  }
  for (int s : sizes) {
    if (s < 2 || s > 8192) throw InvalidArgument("calibration image size must lie in [2, 8192]");
  }
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgument("epsilons must be > 0");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mean)) {
    throw InvalidArgument("noise parameters must be finite with sigma > 0");
  }
}

std::string_view to_string(CalibrationVariant variant) {
  return variant == CalibrationVariant::known_model ? "known" : "estimated";
}

std::vector<CalibrationRow> calibrate(const CalibrationParams& params) {
  params.validate();
  std::vector<CalibrationRow> rows;
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(1, params.mean);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, params.sigma * params.sigma);
  const std::vector<double> mean_vec{params.mean};

  for (int size : params.sizes) {
    const double n_pixels = static_cast<double>(size) * static_cast<double>(size);
    const BackgroundModel known = BackgroundModel::from_parameters(mean, cov, n_pixels);
    const std::size_t n_eps = params.epsilons.size();
    const std::size_t n_var = params.variants.size();
    // counts[v][e][t]
    std::vector<std::vector<std::vector<double>>> counts(
        n_var, std::vector<std::vector<double>>(n_eps, std::vector<double>(
                                                           static_cast<std::size_t>(params.trials))));
    for (int t = 0; t < params.trials; ++t) {
      const std::uint64_t seed =
          derive_seed(params.seed ^ static_cast<std::uint64_t>(size), static_cast<std::uint64_t>(t));
      const ImageTensor image = gen_noise_image(size, size, 1, mean_vec, cov, seed);
      for (std::size_t v = 0; v < n_var; ++v) {
        const BackgroundModel model =
            params.variants[v] == CalibrationVariant::known_model
                ? known
                : estimate_background(image, BackgroundMethod::empirical, kDefaultRidge);
        const NfaMap nfa = nfa_gaussian_map(image, model, params.tail);
        for (std::size_t e = 0; e < n_eps; ++e) {
          const Mask mask = threshold_mask(nfa, params.epsilons[e]);
          const double count = params.unit == FalseAlarmUnit::pixels
                                   ? static_cast<double>(mask.count())
                                   : static_cast<double>(connected_components(mask, 8).size());
          counts[v][e][static_cast<std::size_t>(t)] = count;
        }
      }
    }
    for (std::size_t v = 0; v < n_var; ++v) {
      for (std::size_t e = 0; e < n_eps; ++e) {
        const auto& c = counts[v][e];
        const double trials = static_cast<double>(c.size());
        double sum = 0.0;
        for (double x : c) sum += x;
        const double m = sum / trials;
        double ss = 0.0;
        for (double x : c) ss += (x - m) * (x - m);
        CalibrationRow row;
        row.variant = params.variants[v];
        row.size = size;
        row.epsilon = params.epsilons[e];
        row.trials = params.trials;
        row.mean = m;
        const double eps = params.epsilons[e];
        row.standard_error = std::sqrt(eps * std::max(0.0, 1.0 - eps / n_pixels) / trials);
        row.empirical_standard_error = std::sqrt(ss / (trials - 1.0) / trials);
        row.lower = m - 3.0 * row.standard_error;
        row.upper = m + 3.0 * row.standard_error;
        row.pass = row.lower <= eps;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace acnfa
