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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acnfa/eval.hpp"
#include "acnfa/image.hpp"

namespace acnfa {

enum class Split { train, val, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct DatasetRecord {
  std::string image_id;
  std::filesystem::path image_path;
  /// Empty when the record has no mask.
  std::filesystem::path mask_path;
  Split split = Split::test;
  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// Reads `image_id<TAB>image_path<TAB>mask_path<TAB>split` lines. Blank lines
/// and lines starting with '#' are skipped; an empty mask field or "-" means
/// no mask. Relative paths resolve against the manifest's directory. Ids must
/// be unique and every referenced file must exist.
std::vector<DatasetRecord> read_manifest(const std::filesystem::path& path);

/// Paths are written relative to the manifest directory when they lie below it.
void write_manifest(const std::filesystem::path& path, std::span<const DatasetRecord> records);

/// Loads a single-channel image without rescaling: binary PGM (P5, maxval up
/// to 65535, big-endian samples), 8/16-bit grayscale PNG, or a raw float dump
/// (any K; see save_raw_float). Colour PNGs are rejected.
ImageTensor load_image(const std::filesystem::path& path);

/// 16-bit grayscale PNG; values rounded and clamped to [0, 65535].
void save_png16(const std::filesystem::path& path, const ImageTensor& image);

/// Binary PGM with the given maxval (255 or 65535); values rounded and clamped.
void save_pgm(const std::filesystem::path& path, const ImageTensor& image, int maxval = 65535);

/// Raw float dump: 8-byte header "IMF" + uint8 K + uint16 LE height + uint16
/// LE width, then H*W*K little-endian float32 values, channel-interleaved.
void save_raw_float(const std::filesystem::path& path, const ImageTensor& image);

/// Dispatches on extension: .png -> save_png16, .pgm -> save_pgm, anything
/// else -> save_raw_float.
void save_image(const std::filesystem::path& path, const ImageTensor& image);

/// 8-connected components of the nonzero pixels of channel 0, as tight boxes
/// with extent = component pixel count, in raster order of first pixel.
std::vector<GroundTruthBox> mask_to_boxes(const ImageTensor& mask, const std::string& image_id);

inline constexpr std::int64_t kDefaultMaxExtent = 90;

struct ExtentFilterResult {
  std::vector<DatasetRecord> kept;
  std::vector<DatasetRecord> dropped;
  double dropped_fraction = 0.0;
};

/// Drops every record whose mask has a component larger than max_extent pixels.
ExtentFilterResult filter_by_extent(std::span<const DatasetRecord> records,
                                    std::int64_t max_extent = kDefaultMaxExtent);

/// Same rule on precomputed per-record component extents.
ExtentFilterResult filter_by_extent(std::span<const DatasetRecord> records,
                                    std::span<const std::vector<std::int64_t>> extents,
                                    std::int64_t max_extent = kDefaultMaxExtent);

/// Keys cubic convolution kernel W(t) with parameter a (default -0.5).
double keys_kernel(double t, double a = -0.5);

/// Separable Keys bicubic resampling with pixel-center alignment
/// (src = (dst + 0.5) * in / out - 0.5) and clamped borders.
ImageTensor bicubic_resize(const ImageTensor& image, int out_height, int out_width);

/// Maps an inclusive box through a resize by (sx, sy), rounding outward:
/// x_min' = floor(x_min * sx), x_max' = ceil((x_max + 1) * sx) - 1, clipped to
/// the output size.
Box rescale_box(const Box& box, double sx, double sy, int out_width, int out_height);

/// rescale_box on the box; extent scaled by sx * sy and rounded up.
GroundTruthBox rescale_ground_truth(const GroundTruthBox& gt, double sx, double sy, int out_width,
                                    int out_height);

/// Seeded Fisher-Yates shuffle, then train = floor(n r0), val = floor(n r1),
/// test = the rest. Returned records are in shuffled order with their split set.
std::vector<DatasetRecord> split_dataset(std::span<const DatasetRecord> records,
                                         std::array<double, 3> ratios = {0.6, 0.2, 0.2},
                                         std::uint64_t seed = 0);

}  // namespace acnfa
