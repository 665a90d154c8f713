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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acnfa/detect.hpp"
#include "acnfa/eval.hpp"
#include "acnfa/nfa.hpp"

namespace acnfa {

inline constexpr std::string_view kDetectionsHeader =
    "image_id,x_min,y_min,x_max,y_max,log10_nfa,score,pixel_count";
inline constexpr std::string_view kGroundTruthHeader = "image_id,x_min,y_min,x_max,y_max,extent";

ScoredDetection to_scored(const std::string& image_id, const Detection& detection);

/// Shortest round-trip decimal form ("-inf" for -infinity), as used in every
/// CSV the library writes.
std::string format_double(double value);

/// Header row followed by one line per detection; floats use format_double.
void write_detections_csv(std::ostream& out, std::span<const ScoredDetection> rows);
void write_detections_csv(const std::filesystem::path& path, std::span<const ScoredDetection> rows);
std::vector<ScoredDetection> read_detections_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<ScoredDetection> read_detections_csv(const std::filesystem::path& path);

void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthBox> rows);
void write_ground_truth_csv(const std::filesystem::path& path, std::span<const GroundTruthBox> rows);
std::vector<GroundTruthBox> read_ground_truth_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<GroundTruthBox> read_ground_truth_csv(const std::filesystem::path& path);

/// `recall,precision` per sample.
void write_pr_curve_csv(const std::filesystem::path& path, std::span<const PrSample> samples);

/// Float raster: 4-byte magic, uint16 LE height, uint16 LE width, then
/// height * width little-endian float32 values in row-major order.
/// Magic "NFAL" holds log10 NFA, "SIGN" holds significance.
inline constexpr std::string_view kNfaRasterMagic = "NFAL";
inline constexpr std::string_view kSignificanceRasterMagic = "SIGN";

void write_raster(const std::filesystem::path& path, const NfaMap& map);
void write_raster(const std::filesystem::path& path, const SignificanceMap& map);

struct Raster {
  std::string magic;
  int height = 0;
  int width = 0;
  std::vector<float> values;
};

Raster read_raster(const std::filesystem::path& path);

/// Rebuilds a map from a raster (eta_test is not stored and must be supplied).
NfaMap nfa_map_from_raster(const Raster& raster, double eta_test);
SignificanceMap significance_map_from_raster(const Raster& raster, double eta_test);

}  // namespace acnfa
