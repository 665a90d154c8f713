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

#include "acnfa/formats.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "acnfa/error.hpp"

namespace acnfa {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string where(const std::string& source, int line_no) {
  return source + ":" + std::to_string(line_no);
}

template <typename Int>
Int parse_int(std::string_view text, const std::string& loc) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(loc + ": expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

double parse_double(std::string_view text, const std::string& loc) {
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(loc + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

// Calls `row` for each data line after checking the header.
template <typename RowFn>
void for_each_csv_row(std::istream& in, std::string_view header, const std::string& source,
                      RowFn&& row) {
  std::string line;
  int line_no = 0;
  bool seen_header = false;
  const auto expected_fields = split_csv(header).size();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) {
        throw FormatError(where(source, line_no) + ": expected header '" + std::string(header) +
                          "'");
      }
      seen_header = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != expected_fields) {
      throw FormatError(where(source, line_no) + ": expected " + std::to_string(expected_fields) +
                        " fields, got " + std::to_string(fields.size()));
    }
    row(fields, where(source, line_no));
  }
  if (!seen_header) throw FormatError(source + ": missing CSV header");
}

Box parse_box(const std::vector<std::string_view>& f, const std::string& loc) {
  Box b{parse_int<int>(f[1], loc), parse_int<int>(f[2], loc), parse_int<int>(f[3], loc),
        parse_int<int>(f[4], loc)};
  if (!b.valid() || b.x_min < 0 || b.y_min < 0) throw FormatError(loc + ": invalid box");
  return b;
}

void check_image_id(std::string_view id, const std::string& loc) {
  if (id.empty()) throw FormatError(loc + ": empty image_id");
}

// Ids are written verbatim, so anything that would break the row is refused.
void check_writable_id(const std::string& id) {
  if (id.empty() || id.find_first_of(",\r\n\"") != std::string::npos) {
    throw InvalidArgument("image_id '" + id + "' cannot be written to CSV");
  }
}

void write_u16(std::vector<unsigned char>& out, int v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

void write_raster_values(const fs::path& path, std::string_view magic, int height, int width,
                         const std::vector<double>& values) {
  if (height < 1 || width < 1 || height > 65535 || width > 65535) {
    throw InvalidArgument("raster size must lie in [1, 65535]");
  }
  std::vector<unsigned char> bytes(magic.begin(), magic.end());
  write_u16(bytes, height);
  write_u16(bytes, width);
  bytes.reserve(8 + values.size() * 4);
  for (double v : values) {
    const float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<unsigned char>((u >> s) & 0xFF));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

ScoredDetection to_scored(const std::string& image_id, const Detection& detection) {
  return {image_id, detection.box, detection.log10_nfa, detection.score, detection.pixel_count};
}

std::string format_double(double value) {
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw InvalidArgument("cannot format number");
  return std::string(buf, ptr);
}

void write_detections_csv(std::ostream& out, std::span<const ScoredDetection> rows) {
  out << kDetectionsHeader << '\n';
  for (const auto& r : rows) check_writable_id(r.image_id);
  for (const auto& r : rows) {
    out << r.image_id << ',' << r.box.x_min << ',' << r.box.y_min << ',' << r.box.x_max << ','
        << r.box.y_max << ',' << format_double(r.log10_nfa) << ',' << format_double(r.score) << ','
        << r.pixel_count << '\n';
  }
}

void write_detections_csv(const fs::path& path, std::span<const ScoredDetection> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_detections_csv(out, rows);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<ScoredDetection> read_detections_csv(std::istream& in, const std::string& source) {
  std::vector<ScoredDetection> rows;
  for_each_csv_row(in, kDetectionsHeader, source, [&](const auto& f, const std::string& loc) {
    check_image_id(f[0], loc);
    ScoredDetection d;
    d.image_id = std::string(f[0]);
    d.box = parse_box(f, loc);
    d.log10_nfa = parse_double(f[5], loc);
    d.score = parse_double(f[6], loc);
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw FormatError(loc + ": score outside [0, 1]");
    d.pixel_count = parse_int<std::int64_t>(f[7], loc);
    if (d.pixel_count < 1) throw FormatError(loc + ": pixel_count must be >= 1");
    rows.push_back(std::move(d));
  });
  return rows;
}

std::vector<ScoredDetection> read_detections_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_detections_csv(in, path.string());
}

void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthBox> rows) {
  out << kGroundTruthHeader << '\n';
  for (const auto& g : rows) check_writable_id(g.image_id);
  for (const auto& g : rows) {
    out << g.image_id << ',' << g.box.x_min << ',' << g.box.y_min << ',' << g.box.x_max << ','
        << g.box.y_max << ',' << g.extent << '\n';
  }
}

void write_ground_truth_csv(const fs::path& path, std::span<const GroundTruthBox> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_ground_truth_csv(out, rows);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<GroundTruthBox> read_ground_truth_csv(std::istream& in, const std::string& source) {
  std::vector<GroundTruthBox> rows;
  for_each_csv_row(in, kGroundTruthHeader, source, [&](const auto& f, const std::string& loc) {
    check_image_id(f[0], loc);
    GroundTruthBox g;
    g.image_id = std::string(f[0]);
    g.box = parse_box(f, loc);
    g.extent = parse_int<std::int64_t>(f[5], loc);
    if (g.extent < 1) throw FormatError(loc + ": extent must be >= 1");
    rows.push_back(std::move(g));
  });
  return rows;
}

std::vector<GroundTruthBox> read_ground_truth_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_ground_truth_csv(in, path.string());
}

void write_pr_curve_csv(const fs::path& path, std::span<const PrSample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "recall,precision\n";
  for (const auto& s : samples) {
    out << format_double(s.recall) << ',' << format_double(s.precision) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_raster(const fs::path& path, const NfaMap& map) {
  write_raster_values(path, kNfaRasterMagic, map.height, map.width, map.log10_nfa);
}

void write_raster(const fs::path& path, const SignificanceMap& map) {
  write_raster_values(path, kSignificanceRasterMagic, map.height, map.width, map.values);
}

Raster read_raster(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < 8) throw FormatError(path.string() + ": truncated raster header");
  Raster r;
  r.magic.assign(bytes.begin(), bytes.begin() + 4);
  if (r.magic != kNfaRasterMagic && r.magic != kSignificanceRasterMagic) {
    throw FormatError(path.string() + ": unknown raster magic '" + r.magic + "'");
  }
  r.height = bytes[4] | (bytes[5] << 8);
  r.width = bytes[6] | (bytes[7] << 8);
  const std::size_t n = static_cast<std::size_t>(r.height) * static_cast<std::size_t>(r.width);
  if (bytes.size() != 8 + 4 * n) throw FormatError(path.string() + ": raster size mismatch");
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* b = bytes.data() + 8 + 4 * i;
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    std::memcpy(&r.values[i], &u, sizeof u);
  }
  return r;
}

NfaMap nfa_map_from_raster(const Raster& raster, double eta_test) {
  if (raster.magic != kNfaRasterMagic) throw FormatError("raster does not hold log10 NFA values");
  NfaMap m;
  m.height = raster.height;
  m.width = raster.width;
  m.eta_test = eta_test;
  m.log10_nfa.assign(raster.values.begin(), raster.values.end());
  return m;
}

SignificanceMap significance_map_from_raster(const Raster& raster, double eta_test) {
  if (raster.magic != kSignificanceRasterMagic) {
    throw FormatError("raster does not hold significance values");
  }
  SignificanceMap m;
  m.height = raster.height;
  m.width = raster.width;
  m.eta_test = eta_test;
  m.values.assign(raster.values.begin(), raster.values.end());
  return m;
}

}  // namespace acnfa
