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
#include <string>
#include <vector>

#include "acnfa/nfa.hpp"

namespace acnfa {

enum class CalibrationVariant {
  /// NFA computed with the generating mean and variance.
  known_model,
  /// NFA computed with the per-image empirical estimate.
  estimated_model,
};

enum class FalseAlarmUnit {
  /// Pixels with NFA <= epsilon.
  pixels,
  /// Connected components (8-connectivity) of those pixels.
  detections,
};

struct CalibrationParams {
  std::vector<int> sizes{256};
  std::vector<double> epsilons{0.1, 1.0, 10.0};
  int trials = 100;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double sigma = 1.0;
  std::vector<CalibrationVariant> variants{CalibrationVariant::known_model,
                                           CalibrationVariant::estimated_model};
  FalseAlarmUnit unit = FalseAlarmUnit::pixels;
  TailMode tail = TailMode::two_sided;

  void validate() const;
};

struct CalibrationRow {
  CalibrationVariant variant = CalibrationVariant::known_model;
  int size = 0;
  double epsilon = 0.0;
  int trials = 0;
  /// Mean false alarms per image.
  double mean = 0.0;
  /// Binomial standard error of that mean under the naive model,
  /// sqrt(eps (1 - eps / N) / trials).
  double standard_error = 0.0;
  /// Sample standard error of the per-image counts.
  double empirical_standard_error = 0.0;
  double lower = 0.0;  // mean - 3 SE
  double upper = 0.0;  // mean + 3 SE
  /// The bound "at most epsilon" is not rejected: lower <= epsilon.
  bool pass = false;
};

std::string_view to_string(CalibrationVariant variant);

/// Monte Carlo audit on i.i.d. size x size Gaussian images. Image t of size
/// s uses seed derive_seed(seed ^ s, t); all epsilons share the same images.
std::vector<CalibrationRow> calibrate(const CalibrationParams& params);

}  // namespace acnfa
