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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acnfa/image.hpp"

namespace acnfa {

inline constexpr double kDefaultIouMin = 0.05;

struct GroundTruthBox {
  std::string image_id;
  Box box;
  /// Pixel count of the source mask component.
  std::int64_t extent = 1;
  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

/// One row of the detections CSV.
struct ScoredDetection {
  std::string image_id;
  Box box;
  double log10_nfa = 0.0;
  double score = 0.0;
  std::int64_t pixel_count = 1;
  friend bool operator==(const ScoredDetection&, const ScoredDetection&) = default;
};

struct MatchResult {
  /// (detection index, ground-truth index) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> true_positives;
  std::vector<std::size_t> false_positives;
  std::vector<std::size_t> false_negatives;
};

struct PrSample {
  double recall = 0.0;
  double precision = 0.0;
  /// Score threshold (inclusive) producing this point.
  double threshold = 0.0;
};

struct EvalReport {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
  double iou_min = kDefaultIouMin;
  std::vector<PrSample> pr_samples;
};

/// Pixel-area IoU of inclusive boxes (width = x_max - x_min + 1).
double iou(const Box& a, const Box& b);

/// Greedy one-to-one matching. Detections are visited by descending score
/// (input order on ties); each takes the unmatched ground truth of the same
/// image with the highest IoU >= iou_min, lowest index on ties. A second
/// detection on an already matched object is a false positive.
MatchResult match_detections(std::span<const ScoredDetection> detections,
                             std::span<const GroundTruthBox> ground_truth,
                             double iou_min = kDefaultIouMin);

/// All-point interpolated area under the pooled precision-recall curve,
/// sampled at every distinct detection score. Zero when there is no ground
/// truth or no detection.
double average_precision(std::span<const ScoredDetection> detections,
                         std::span<const GroundTruthBox> ground_truth,
                         double iou_min = kDefaultIouMin,
                         std::vector<PrSample>* samples = nullptr);

/// Single operating point: counts, precision, recall and F1 (0/0 -> 0).
/// ap and pr_samples are left empty.
EvalReport f1_at_epsilon(std::span<const ScoredDetection> detections,
                         std::span<const GroundTruthBox> ground_truth,
                         double iou_min = kDefaultIouMin);

/// f1_at_epsilon plus AP and the PR samples.
EvalReport evaluate(std::span<const ScoredDetection> detections,
                    std::span<const GroundTruthBox> ground_truth,
                    double iou_min = kDefaultIouMin);

}  // namespace acnfa
