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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "acnfa/error.hpp"
#include "acnfa/eval.hpp"
#include "eval_oracles.hpp"

namespace acnfa {
namespace {

using namespace oracle;

TEST(Iou, Examples) {
  const Box a{0, 0, 9, 9};
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, Box{20, 20, 25, 25}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{5, 5, 14, 14}), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(iou(Box{3, 3, 3, 3}, Box{1, 1, 5, 5}), 1.0 / 25.0);
  EXPECT_THROW(iou(Box{2, 0, 1, 0}, a), InvalidArgument);
}

TEST(Iou, AgreesWithPixelCount) {
  std::mt19937_64 gen(4);
  for (int i = 0; i < 500; ++i) {
    const Box a = random_box(gen), b = random_box(gen);
    EXPECT_DOUBLE_EQ(iou(a, b), iou_by_pixels(a, b));
  }
}

TEST(Match, Examples) {
  const std::vector<GroundTruthBox> one{gt("x", {0, 0, 3, 3})};
  const std::vector<ScoredDetection> cover{det("x", {0, 0, 3, 1}, 0.9)};  // IoU 0.5
  auto m = match_detections(cover, one);
  EXPECT_EQ(m.true_positives.size(), 1u);
  EXPECT_TRUE(m.false_positives.empty());
  EXPECT_TRUE(m.false_negatives.empty());

  const std::vector<ScoredDetection> twice{det("x", {0, 0, 3, 1}, 0.9), det("x", {0, 0, 3, 3}, 0.8)};
  m = match_detections(twice, one);
  EXPECT_EQ(m.true_positives.size(), 1u);
  EXPECT_EQ(m.true_positives[0].first, 0u);
  EXPECT_EQ(m.false_positives, std::vector<std::size_t>{1});

  // a detection never matches a box from another image
  const std::vector<ScoredDetection> other{det("y", {0, 0, 3, 3}, 0.9)};
  m = match_detections(other, one);
  EXPECT_TRUE(m.true_positives.empty());
  EXPECT_THROW(match_detections(other, one, 0.0), InvalidArgument);
}

TEST(Match, AgreesWithGreedyTraceOracle) {
  std::mt19937_64 gen(200);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance in = random_instance(gen, 6, 6);
    const auto want = greedy_trace_oracle(in.dets, in.gts, kDefaultIouMin);
    const auto got = match_detections(in.dets, in.gts, kDefaultIouMin);
    std::vector<int> got_match(in.dets.size(), -1);
    for (const auto& [d, g] : got.true_positives) got_match[d] = static_cast<int>(g);
    EXPECT_EQ(got_match, want) << "trial " << trial;
    EXPECT_EQ(got.true_positives.size() + got.false_positives.size(), in.dets.size());
    EXPECT_EQ(got.true_positives.size() + got.false_negatives.size(), in.gts.size());
  }
}

std::size_t max_matching(const Instance& in, std::size_t d, unsigned used) {
  if (d == in.dets.size()) return 0;
  std::size_t best = max_matching(in, d + 1, used);
  for (std::size_t g = 0; g < in.gts.size(); ++g) {
    if ((used >> g) & 1u) continue;
    if (in.gts[g].image_id != in.dets[d].image_id) continue;
    if (iou(in.dets[d].box, in.gts[g].box) < kDefaultIouMin) continue;
    best = std::max(best, 1 + max_matching(in, d + 1, used | (1u << g)));
  }
  return best;
}

// Greedy never beats the maximum bipartite matching.
TEST(Match, BoundedByMaximumMatching) {
  std::mt19937_64 gen(201);
  int optimal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Instance in = random_instance(gen, 6, 6);
    const std::size_t best = max_matching(in, 0, 0u);
    const std::size_t greedy = match_detections(in.dets, in.gts).true_positives.size();
    EXPECT_LE(greedy, best);
    optimal += greedy == best;
  }
  EXPECT_GE(optimal, 150);  // the two coincide on most instances
}

TEST(Match, GroundTruthOrderDoesNotMatterWithoutTies) {
  std::mt19937_64 gen(202);
  int checked = 0;
  for (int trial = 0; trial < 300 && checked < 100; ++trial) {
    Instance in = random_instance(gen, 6, 6);
    // skip instances with IoU ties that the index tie-break would resolve
    bool ties = false;
    for (const auto& d : in.dets) {
      std::set<double> seen;
      for (const auto& g : in.gts) {
        if (g.image_id != d.image_id) continue;
        const double v = iou(d.box, g.box);
        if (v >= kDefaultIouMin && !seen.insert(v).second) ties = true;
      }
    }
    if (ties) continue;
    ++checked;
    const auto base = match_detections(in.dets, in.gts);
    std::vector<std::size_t> perm(in.gts.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<GroundTruthBox> shuffled;
    for (auto p : perm) shuffled.push_back(in.gts[p]);
    const auto moved = match_detections(in.dets, shuffled);
    std::set<std::pair<std::size_t, std::size_t>> a, b;
    for (const auto& [d, g] : base.true_positives) a.insert({d, g});
    for (const auto& [d, g] : moved.true_positives) b.insert({d, perm[g]});
    EXPECT_EQ(a, b);
  }
  EXPECT_GE(checked, 50);
}

TEST(AveragePrecision, Examples) {
  const std::vector<GroundTruthBox> gts{gt("i", {0, 0, 2, 2}), gt("i", {10, 10, 12, 12})};
  const std::vector<ScoredDetection> fixture{det("i", {0, 0, 2, 2}, 0.9),
                                             det("i", {20, 20, 22, 22}, 0.8),
                                             det("i", {10, 10, 12, 12}, 0.7)};
  EXPECT_NEAR(average_precision(fixture, gts), 5.0 / 6.0, 1e-15);

  const std::vector<ScoredDetection> perfect{det("i", {0, 0, 2, 2}, 0.9),
                                             det("i", {10, 10, 12, 12}, 0.3)};
  EXPECT_EQ(average_precision(perfect, gts), 1.0);
  const std::vector<ScoredDetection> misses{det("i", {30, 30, 31, 31}, 0.9)};
  EXPECT_EQ(average_precision(misses, gts), 0.0);
  EXPECT_EQ(average_precision({}, gts), 0.0);
  EXPECT_EQ(average_precision(perfect, {}), 0.0);
}

TEST(AveragePrecision, AgreesWithThresholdSweep) {
  std::mt19937_64 gen(50);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance in = random_instance(gen, 12, 8);
    EXPECT_NEAR(average_precision(in.dets, in.gts), brute_force_ap(in.dets, in.gts, kDefaultIouMin),
                1e-12)
        << "trial " << trial;
  }
}

TEST(AveragePrecision, PrSamplesRecallNondecreasing) {
  std::mt19937_64 gen(51);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance in = random_instance(gen, 12, 8);
    std::vector<PrSample> samples;
    const double ap = average_precision(in.dets, in.gts, kDefaultIouMin, &samples);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
    for (std::size_t i = 1; i < samples.size(); ++i) {
      EXPECT_GE(samples[i].recall, samples[i - 1].recall);
      EXPECT_LT(samples[i].threshold, samples[i - 1].threshold);
    }
  }
}

TEST(AveragePrecision, InvariantUnderMonotoneScoreMaps) {
  std::mt19937_64 gen(52);
  const std::vector<std::function<double(double)>> maps{
      [](double s) { return 3.0 * s - 7.0; }, [](double s) { return std::exp(5.0 * s); },
      [](double s) { return 1.0 / (1.0 + std::exp(-2.0 * (s - 0.3))); },
      [](double s) { return s * s * s; }};
  for (int trial = 0; trial < 50; ++trial) {
    Instance in = random_instance(gen, 12, 8);
    const double base = average_precision(in.dets, in.gts);
    for (const auto& f : maps) {
      auto mapped = in.dets;
      for (auto& d : mapped) d.score = f(d.score);
      EXPECT_EQ(average_precision(mapped, in.gts), base);
    }
  }
}

TEST(AveragePrecision, LowestScoredFalsePositiveNeverHelps) {
  std::mt19937_64 gen(53);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = random_instance(gen, 10, 6);
    const double base = average_precision(in.dets, in.gts);
    in.dets.push_back(det("nowhere", {0, 0, 0, 0}, -1.0));
    EXPECT_LE(average_precision(in.dets, in.gts), base);
  }
}

TEST(F1, Examples) {
  std::vector<GroundTruthBox> gts;
  std::vector<ScoredDetection> dets;
  for (int i = 0; i < 10; ++i) gts.push_back(gt("i", {10 * i, 0, 10 * i + 2, 2}));
  for (int i = 0; i < 8; ++i) dets.push_back(det("i", {10 * i, 0, 10 * i + 2, 2}, 0.5));
  dets.push_back(det("i", {0, 50, 1, 51}, 0.4));
  dets.push_back(det("i", {5, 50, 6, 51}, 0.4));
  const EvalReport r = f1_at_epsilon(dets, gts);
  EXPECT_EQ(r.tp, 8);
  EXPECT_EQ(r.fp, 2);
  EXPECT_EQ(r.fn, 2);
  EXPECT_DOUBLE_EQ(r.precision, 0.8);
  EXPECT_DOUBLE_EQ(r.recall, 0.8);
  EXPECT_DOUBLE_EQ(r.f1, 0.8);

  const std::vector<ScoredDetection> one{det("i", {0, 0, 2, 2}, 1.0)};
  const std::vector<GroundTruthBox> first{gts[0]};
  EXPECT_EQ(f1_at_epsilon(one, first).f1, 1.0);
  const std::vector<ScoredDetection> wrong{det("i", {90, 90, 91, 91}, 1.0)};
  const auto zero = f1_at_epsilon(wrong, first);
  EXPECT_EQ(zero.f1, 0.0);
  EXPECT_EQ(zero.precision, 0.0);
  const auto empty = evaluate({}, {});
  EXPECT_EQ(empty.f1, 0.0);
  EXPECT_EQ(empty.ap, 0.0);
}

TEST(F1, ZeroIffNoTruePositive) {
  std::mt19937_64 gen(54);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance in = random_instance(gen, 6, 6);
    const EvalReport r = evaluate(in.dets, in.gts);
    EXPECT_EQ(r.f1 == 0.0, r.tp == 0);
    EXPECT_LE(r.f1, 1.0);
    EXPECT_LE(r.ap, 1.0);
    if (r.precision + r.recall > 0.0) {
      EXPECT_NEAR(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall), 1e-15);
    }
  }
}

}  // namespace
}  // namespace acnfa
