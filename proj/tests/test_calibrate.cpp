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

#include <gtest/gtest.h>

#include <cmath>

#include "acnfa/calibrate.hpp"
#include "acnfa/error.hpp"

namespace acnfa {
namespace {

CalibrationParams small_params() {
  CalibrationParams p;
  p.sizes = {64};
  p.epsilons = {0.5, 2.0};
  p.trials = 300;
  p.seed = 17;
  return p;
}

TEST(Calibrate, RowsAndStandardErrors) {
  const auto rows = calibrate(small_params());
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.size, 64);
    EXPECT_EQ(r.trials, 300);
    const double n = 64.0 * 64.0;
    EXPECT_NEAR(r.standard_error, std::sqrt(r.epsilon * (1 - r.epsilon / n) / 300.0), 1e-15);
    EXPECT_NEAR(r.lower, r.mean - 3 * r.standard_error, 1e-15);
    EXPECT_NEAR(r.upper, r.mean + 3 * r.standard_error, 1e-15);
    EXPECT_EQ(r.pass, r.lower <= r.epsilon);
  }
}

TEST(Calibrate, KnownModelMeanMatchesEpsilon) {
  for (const auto& r : calibrate(small_params())) {
    if (r.variant != CalibrationVariant::known_model) continue;
    EXPECT_NEAR(r.mean, r.epsilon, 4 * r.standard_error) << "eps " << r.epsilon;
    EXPECT_TRUE(r.pass);
  }
}

TEST(Calibrate, EstimatedModelStaysBelowBound) {
  for (const auto& r : calibrate(small_params())) {
    if (r.variant != CalibrationVariant::estimated_model) continue;
    EXPECT_LE(r.lower, r.epsilon) << "eps " << r.epsilon;
  }
}

TEST(Calibrate, DetectionUnitNeverExceedsPixelUnit) {
  CalibrationParams p = small_params();
  p.variants = {CalibrationVariant::known_model};
  const auto pixels = calibrate(p);
  p.unit = FalseAlarmUnit::detections;
  const auto dets = calibrate(p);
  ASSERT_EQ(pixels.size(), dets.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) EXPECT_LE(dets[i].mean, pixels[i].mean);
}

TEST(Calibrate, DeterministicAndSeedSensitive) {
  CalibrationParams p = small_params();
  p.trials = 50;
  const auto a = calibrate(p);
  const auto b = calibrate(p);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mean, b[i].mean);
  // epsilons share images, so counts are nested in epsilon
  EXPECT_LE(a[0].mean, a[1].mean);
}

TEST(Calibrate, Validation) {
  CalibrationParams p = small_params();
  p.trials = 0;
  EXPECT_THROW(calibrate(p), InvalidArgument);
  p = small_params();
  p.epsilons = {-1.0};
  EXPECT_ANY_THROW(calibrate(p));
  p = small_params();
  p.sigma = 0.0;
  EXPECT_ANY_THROW(calibrate(p));
  p = small_params();
  p.sizes = {};
  EXPECT_ANY_THROW(calibrate(p));
}

}  // namespace
}  // namespace acnfa
