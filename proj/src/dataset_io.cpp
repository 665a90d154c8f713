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

#include "acnfa/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "acnfa/detect.hpp"
#include "acnfa/error.hpp"
#include "acnfa/random.hpp"

namespace acnfa {

namespace fs = std::filesystem;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "test";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  throw FormatError("unknown split '" + std::string(text) + "' (expected train, val or test)");
}

std::vector<DatasetRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) -> fs::path {
    if (p.empty() || p == "-") return {};
    fs::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
  };

  std::vector<DatasetRecord> records;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 4) {
      throw FormatError(where + ": expected 4 tab-separated fields, got " +
                        std::to_string(fields.size()));
    }
    DatasetRecord r;
    r.image_id = fields[0];
    if (r.image_id.empty()) throw FormatError(where + ": empty image_id");
    if (!ids.insert(r.image_id).second) throw FormatError(where + ": duplicate id " + r.image_id);
    r.image_path = resolve(fields[1]);
    if (r.image_path.empty()) throw FormatError(where + ": missing image path");
    r.mask_path = resolve(fields[2]);
    r.split = parse_split(fields[3]);
    if (!fs::exists(r.image_path)) throw IoError(where + ": image not found: " + r.image_path.string());
    if (!r.mask_path.empty() && !fs::exists(r.mask_path)) {
      throw IoError(where + ": mask not found: " + r.mask_path.string());
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(const fs::path& path, std::span<const DatasetRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) -> std::string {
    if (p.empty()) return "";
    const fs::path r = p.lexically_relative(base.empty() ? fs::path(".") : base);
    if (!r.empty() && *r.begin() != "..") return r.generic_string();
    return p.generic_string();
  };
  for (const auto& r : records) {
    out << r.image_id << '\t' << rel(r.image_path) << '\t' << rel(r.mask_path) << '\t'
        << to_string(r.split) << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path.string());
}

std::vector<GroundTruthBox> mask_to_boxes(const ImageTensor& mask, const std::string& image_id) {
  Mask bits;
  bits.height = mask.height();
  bits.width = mask.width();
  bits.values.resize(mask.pixel_count());
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    bits.values[p] = mask.pixel(p)[0] != 0.0 ? 1 : 0;
  }
  std::vector<GroundTruthBox> boxes;
  for (const auto& comp : connected_components(bits, 8)) {
    GroundTruthBox g;
    g.image_id = image_id;
    g.box = {comp.front().col, comp.front().row, comp.front().col, comp.front().row};
    for (const auto& p : comp) {
      g.box.x_min = std::min(g.box.x_min, p.col);
      g.box.x_max = std::max(g.box.x_max, p.col);
      g.box.y_min = std::min(g.box.y_min, p.row);
      g.box.y_max = std::max(g.box.y_max, p.row);
    }
    g.extent = static_cast<std::int64_t>(comp.size());
    boxes.push_back(std::move(g));
  }
  return boxes;
}

ExtentFilterResult filter_by_extent(std::span<const DatasetRecord> records,
                                    std::span<const std::vector<std::int64_t>> extents,
                                    std::int64_t max_extent) {
  if (extents.size() != records.size()) {
    throw InvalidArgument("filter_by_extent: one extent list per record required");
  }
  if (max_extent < 1) throw InvalidArgument("filter_by_extent: max_extent must be >= 1");
  ExtentFilterResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& e = extents[i];
    const bool too_large =
        std::any_of(e.begin(), e.end(), [&](std::int64_t v) { return v > max_extent; });
    (too_large ? result.dropped : result.kept).push_back(records[i]);
  }
  result.dropped_fraction =
      records.empty() ? 0.0
                      : static_cast<double>(result.dropped.size()) /
                            static_cast<double>(records.size());
  return result;
}

ExtentFilterResult filter_by_extent(std::span<const DatasetRecord> records,
                                    std::int64_t max_extent) {
  std::vector<std::vector<std::int64_t>> extents;
  extents.reserve(records.size());
  for (const auto& r : records) {
    if (r.mask_path.empty()) {
      throw InvalidArgument("filter_by_extent: record " + r.image_id + " has no mask");
    }
    std::vector<std::int64_t> e;
    for (const auto& g : mask_to_boxes(load_image(r.mask_path), r.image_id)) e.push_back(g.extent);
    extents.push_back(std::move(e));
  }
  return filter_by_extent(records, extents, max_extent);
}

double keys_kernel(double t, double a) {
  const double x = std::fabs(t);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
};

std::vector<Taps> resample_taps(int in_len, int out_len) {
  std::vector<Taps> taps(static_cast<std::size_t>(out_len));
  const double scale = static_cast<double>(in_len) / static_cast<double>(out_len);
  for (int i = 0; i < out_len; ++i) {
    const double src = (i + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double frac = src - base;
    Taps& t = taps[static_cast<std::size_t>(i)];
    for (int j = 0; j < 4; ++j) {
      const int idx = static_cast<int>(base) - 1 + j;
      t.index[static_cast<std::size_t>(j)] = std::clamp(idx, 0, in_len - 1);
      t.weight[static_cast<std::size_t>(j)] = keys_kernel(frac - (j - 1));
    }
  }
  return taps;
}

}  // namespace

ImageTensor bicubic_resize(const ImageTensor& image, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1) throw InvalidArgument("bicubic_resize: bad output size");
  if (image.empty()) throw InvalidArgument("bicubic_resize: empty image");
  const int k = image.channels();
  const auto col_taps = resample_taps(image.width(), out_width);
  const auto row_taps = resample_taps(image.height(), out_height);

  ImageTensor horizontal(image.height(), out_width, k);
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < out_width; ++c) {
      const Taps& t = col_taps[static_cast<std::size_t>(c)];
      for (int ch = 0; ch < k; ++ch) {
        double v = 0.0;
        for (int j = 0; j < 4; ++j) v += t.weight[j] * image.at(r, t.index[j], ch);
        horizontal.at(r, c, ch) = v;
      }
    }
  }
  ImageTensor out(out_height, out_width, k);
  for (int r = 0; r < out_height; ++r) {
    const Taps& t = row_taps[static_cast<std::size_t>(r)];
    for (int c = 0; c < out_width; ++c) {
      for (int ch = 0; ch < k; ++ch) {
        double v = 0.0;
        for (int j = 0; j < 4; ++j) v += t.weight[j] * horizontal.at(t.index[j], c, ch);
        out.at(r, c, ch) = v;
      }
    }
  }
  return out;
}

Box rescale_box(const Box& box, double sx, double sy, int out_width, int out_height) {
  if (!(sx > 0.0) || !(sy > 0.0)) throw InvalidArgument("rescale_box: scale must be positive");
  if (!box.valid()) throw InvalidArgument("rescale_box: invalid box");
  // A tiny slack keeps exact products like 2.5 * 256 from rounding outward.
  constexpr double kSlack = 1e-9;
  Box out;
  out.x_min = static_cast<int>(std::floor(box.x_min * sx + kSlack));
  out.y_min = static_cast<int>(std::floor(box.y_min * sy + kSlack));
  out.x_max = static_cast<int>(std::ceil((box.x_max + 1) * sx - kSlack)) - 1;
  out.y_max = static_cast<int>(std::ceil((box.y_max + 1) * sy - kSlack)) - 1;
  out.x_min = std::clamp(out.x_min, 0, out_width - 1);
  out.y_min = std::clamp(out.y_min, 0, out_height - 1);
  out.x_max = std::clamp(out.x_max, out.x_min, out_width - 1);
  out.y_max = std::clamp(out.y_max, out.y_min, out_height - 1);
  return out;
}

GroundTruthBox rescale_ground_truth(const GroundTruthBox& gt, double sx, double sy, int out_width,
                                    int out_height) {
  GroundTruthBox out = gt;
  out.box = rescale_box(gt.box, sx, sy, out_width, out_height);
  out.extent = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(static_cast<double>(gt.extent) * sx * sy - 1e-9)));
  return out;
}

std::vector<DatasetRecord> split_dataset(std::span<const DatasetRecord> records,
                                         std::array<double, 3> ratios, std::uint64_t seed) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("split ratios must be >= 0");
    total += r;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InvalidArgument("split ratios must sum to 1");

  std::vector<DatasetRecord> out(records.begin(), records.end());
  Rng rng(seed);
  for (std::size_t i = out.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(out[i - 1], out[j]);
  }
  const auto n = static_cast<double>(out.size());
  const auto n_train = static_cast<std::size_t>(std::floor(n * ratios[0] + 1e-9));
  const auto n_val = std::min(out.size() - n_train,
                              static_cast<std::size_t>(std::floor(n * ratios[1] + 1e-9)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].split = i < n_train ? Split::train : (i < n_train + n_val ? Split::val : Split::test);
  }
  return out;
}

}  // namespace acnfa
