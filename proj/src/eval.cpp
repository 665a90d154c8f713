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

#include "acnfa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string_view>

#include "acnfa/error.hpp"

namespace acnfa {
namespace {

void check_iou_min(double iou_min) {
  if (!(iou_min > 0.0 && iou_min <= 1.0)) throw InvalidArgument("iou_min must lie in (0, 1]");
}

std::vector<std::size_t> by_descending_score(std::span<const ScoredDetection> detections) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score > detections[b].score;
  });
  return order;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Greedy pass; returns the matched ground-truth index per detection (or npos).
std::vector<std::size_t> greedy_assign(std::span<const ScoredDetection> detections,
                                       std::span<const GroundTruthBox> ground_truth,
                                       std::span<const std::size_t> order, double iou_min) {
  constexpr auto npos = static_cast<std::size_t>(-1);
  std::map<std::string_view, std::vector<std::size_t>> gts_by_image;
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    if (!ground_truth[g].box.valid()) throw InvalidArgument("invalid ground-truth box");
    gts_by_image[ground_truth[g].image_id].push_back(g);
  }
  std::vector<bool> taken(ground_truth.size(), false);
  std::vector<std::size_t> assigned(detections.size(), npos);
  for (std::size_t d : order) {
    const auto& det = detections[d];
    if (!det.box.valid()) throw InvalidArgument("invalid detection box");
    auto it = gts_by_image.find(det.image_id);
    if (it == gts_by_image.end()) continue;
    double best = -1.0;
    std::size_t best_gt = npos;
    for (std::size_t g : it->second) {
      if (taken[g]) continue;
      const double v = iou(det.box, ground_truth[g].box);
      if (v >= iou_min && v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best_gt != npos) {
      taken[best_gt] = true;
      assigned[d] = best_gt;
    }
  }
  return assigned;
}

}  // namespace

double iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) throw InvalidArgument("iou: invalid box");
  const int ix0 = std::max(a.x_min, b.x_min);
  const int iy0 = std::max(a.y_min, b.y_min);
  const int ix1 = std::min(a.x_max, b.x_max);
  const int iy1 = std::min(a.y_max, b.y_max);
  const long long inter = (ix1 >= ix0 && iy1 >= iy0)
                              ? static_cast<long long>(ix1 - ix0 + 1) * (iy1 - iy0 + 1)
                              : 0;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match_detections(std::span<const ScoredDetection> detections,
                             std::span<const GroundTruthBox> ground_truth, double iou_min) {
  check_iou_min(iou_min);
  const auto order = by_descending_score(detections);
  const auto assigned = greedy_assign(detections, ground_truth, order, iou_min);
  MatchResult result;
  std::vector<bool> matched_gt(ground_truth.size(), false);
  for (std::size_t d : order) {
    if (assigned[d] == static_cast<std::size_t>(-1)) {
      result.false_positives.push_back(d);
    } else {
      result.true_positives.emplace_back(d, assigned[d]);
      matched_gt[assigned[d]] = true;
    }
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    if (!matched_gt[g]) result.false_negatives.push_back(g);
  }
  return result;
}

double average_precision(std::span<const ScoredDetection> detections,
                         std::span<const GroundTruthBox> ground_truth, double iou_min,
                         std::vector<PrSample>* samples) {
  check_iou_min(iou_min);
  if (samples) samples->clear();
  const auto order = by_descending_score(detections);
  // Greedy matching visits detections in this same order, so the matching of
  // every retained set {score >= t} is a prefix of the full matching.
  const auto assigned = greedy_assign(detections, ground_truth, order, iou_min);
  const double n_gt = static_cast<double>(ground_truth.size());

  std::vector<PrSample> curve;
  double tp = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (assigned[order[i]] != static_cast<std::size_t>(-1)) tp += 1.0;
    const bool group_end =
        i + 1 == order.size() || detections[order[i + 1]].score != detections[order[i]].score;
    if (!group_end) continue;
    curve.push_back({ratio(tp, n_gt), tp / static_cast<double>(i + 1),
                     detections[order[i]].score});
  }
  if (samples) *samples = curve;
  if (curve.empty() || n_gt == 0.0) return 0.0;

  // Precision made monotone from the right, then summed over recall steps.
  std::vector<double> interp(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    interp[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    ap += (curve[i].recall - prev_recall) * interp[i];
    prev_recall = curve[i].recall;
  }
  return std::clamp(ap, 0.0, 1.0);
}

EvalReport f1_at_epsilon(std::span<const ScoredDetection> detections,
                         std::span<const GroundTruthBox> ground_truth, double iou_min) {
  const MatchResult m = match_detections(detections, ground_truth, iou_min);
  EvalReport r;
  r.iou_min = iou_min;
  r.tp = static_cast<std::int64_t>(m.true_positives.size());
  r.fp = static_cast<std::int64_t>(m.false_positives.size());
  r.fn = static_cast<std::int64_t>(m.false_negatives.size());
  r.precision = ratio(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fp));
  r.recall = ratio(static_cast<double>(r.tp), static_cast<double>(r.tp + r.fn));
  r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  return r;
}

EvalReport evaluate(std::span<const ScoredDetection> detections,
                    std::span<const GroundTruthBox> ground_truth, double iou_min) {
  EvalReport r = f1_at_epsilon(detections, ground_truth, iou_min);
  r.ap = average_precision(detections, ground_truth, iou_min, &r.pr_samples);
  return r;
}

}  // namespace acnfa
