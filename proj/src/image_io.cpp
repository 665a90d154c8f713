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

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "acnfa/dataset_io.hpp"
#include "acnfa/error.hpp"

namespace acnfa {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// PGM

ImageTensor decode_pgm(const std::vector<unsigned char>& bytes, const fs::path& path) {
  std::size_t pos = 2;
  const bool ascii = bytes[1] == '2';
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> long {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw FormatError(path.string() + ": malformed PGM header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1000000) throw FormatError(path.string() + ": PGM header value too large");
    }
    return v;
  };
  const long width = read_uint();
  const long height = read_uint();
  const long maxval = read_uint();
  if (width < 1 || height < 1) throw FormatError(path.string() + ": bad PGM size");
  if (maxval < 1 || maxval > 65535) {
    throw FormatError(path.string() + ": unsupported PGM maxval " + std::to_string(maxval));
  }
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> values(n);
  if (ascii) {
    for (std::size_t i = 0; i < n; ++i) values[i] = static_cast<double>(read_uint());
  } else {
    ++pos;  // single whitespace after maxval
    const std::size_t bps = maxval < 256 ? 1 : 2;
    if (bytes.size() < pos + n * bps) throw FormatError(path.string() + ": truncated PGM data");
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = bps == 1 ? bytes[pos + i]
                           : static_cast<double>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1]);
    }
  }
  return ImageTensor(static_cast<int>(height), static_cast<int>(width), 1, std::move(values));
}

// ---------------------------------------------------------------------------
// Raw float dump

constexpr std::array<unsigned char, 3> kRawMagic = {'I', 'M', 'F'};

ImageTensor decode_raw_float(const std::vector<unsigned char>& bytes, const fs::path& path) {
  if (bytes.size() < 8) throw FormatError(path.string() + ": truncated raw header");
  const int k = bytes[3];
  const int height = bytes[4] | (bytes[5] << 8);
  const int width = bytes[6] | (bytes[7] << 8);
  if (k < 1 || height < 1 || width < 1) throw FormatError(path.string() + ": bad raw header");
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
                        static_cast<std::size_t>(k);
  if (bytes.size() != 8 + 4 * n) throw FormatError(path.string() + ": raw payload size mismatch");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* b = bytes.data() + 8 + 4 * i;
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, sizeof f);
    values[i] = f;
  }
  return ImageTensor(height, width, k, std::move(values));
}

// ---------------------------------------------------------------------------
// PNG through libpng. libpng reports errors by longjmp; every object with a
// destructor lives in the caller so nothing is skipped by the jump.

struct PngErrorSink {
  std::string message;
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  if (sink) sink->message = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngMemoryReader {
  const std::vector<unsigned char>* bytes;
  std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->bytes->size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, reader->bytes->data() + reader->offset, length);
  reader->offset += length;
}

struct PngDecoded {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> pixels;  // tightly packed rows
};

// Returns false with sink.message set on libpng failure.
bool decode_png_raw(const std::vector<unsigned char>& bytes, PngDecoded& out, PngErrorSink& sink,
                    std::vector<png_bytep>& rows) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_handler,
                                           png_warning_handler);
  if (!png) {
    sink.message = "libpng initialisation failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  PngMemoryReader reader{&bytes, 0};
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (sink.message.empty()) sink.message = "libpng failure";
    return false;
  }
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);
  if (out.color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;  // caller rejects by colour type
  }
  if (out.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.pixels.resize(row_bytes * out.height);
  rows.resize(out.height);
  for (png_uint_32 r = 0; r < out.height; ++r) rows[r] = out.pixels.data() + r * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

ImageTensor decode_png(const std::vector<unsigned char>& bytes, const fs::path& path) {
  PngDecoded decoded;
  PngErrorSink sink;
  std::vector<png_bytep> rows;
  if (!decode_png_raw(bytes, decoded, sink, rows)) {
    throw FormatError(path.string() + ": " + sink.message);
  }
  if (decoded.color_type != PNG_COLOR_TYPE_GRAY) {
    throw FormatError(path.string() +
                      ": only single-channel grayscale PNG is supported (colour or alpha input)");
  }
  if (decoded.bit_depth != 8 && decoded.bit_depth != 16) {
    throw FormatError(path.string() + ": unsupported PNG bit depth " +
                      std::to_string(decoded.bit_depth));
  }
  const std::size_t n = static_cast<std::size_t>(decoded.width) * decoded.height;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = decoded.bit_depth == 8
                    ? decoded.pixels[i]
                    : static_cast<double>((decoded.pixels[2 * i] << 8) | decoded.pixels[2 * i + 1]);
  }
  return ImageTensor(static_cast<int>(decoded.height), static_cast<int>(decoded.width), 1,
                     std::move(values));
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

bool encode_png16_raw(const std::vector<unsigned char>& samples, int width, int height,
                      std::vector<unsigned char>& out, PngErrorSink& sink,
                      std::vector<png_const_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_handler,
                                            png_warning_handler);
  if (!png) {
    sink.message = "libpng initialisation failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    if (sink.message.empty()) sink.message = "libpng failure";
    return false;
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * 2;
  rows.resize(static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) rows[static_cast<std::size_t>(r)] = samples.data() + r * row_bytes;
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

unsigned quantize(double v, int maxval) {
  return static_cast<unsigned>(std::clamp(std::nearbyint(v), 0.0, static_cast<double>(maxval)));
}

void require_single_channel(const ImageTensor& image, const char* what) {
  if (image.empty()) throw InvalidArgument(std::string(what) + ": empty image");
  if (image.channels() != 1) {
    throw InvalidArgument(std::string(what) + ": only single-channel images can be written");
  }
}

}  // namespace

ImageTensor load_image(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' &&
      bytes[3] == 'G') {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '2')) {
    return decode_pgm(bytes, path);
  }
  if (bytes.size() >= 3 && std::equal(kRawMagic.begin(), kRawMagic.end(), bytes.begin())) {
    return decode_raw_float(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '3' || bytes[1] == '6')) {
    throw FormatError(path.string() + ": colour PPM input is not supported");
  }
  throw FormatError(path.string() + ": unrecognised image format");
}

void save_png16(const fs::path& path, const ImageTensor& image) {
  require_single_channel(image, "save_png16");
  std::vector<unsigned char> samples(image.pixel_count() * 2);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const unsigned v = quantize(image.pixel(i)[0], 65535);
    samples[2 * i] = static_cast<unsigned char>(v >> 8);
    samples[2 * i + 1] = static_cast<unsigned char>(v & 0xFF);
  }
  std::vector<unsigned char> encoded;
  PngErrorSink sink;
  std::vector<png_const_bytep> rows;
  if (!encode_png16_raw(samples, image.width(), image.height(), encoded, sink, rows)) {
    throw IoError(path.string() + ": " + sink.message);
  }
  write_file(path, encoded);
}

void save_pgm(const fs::path& path, const ImageTensor& image, int maxval) {
  require_single_channel(image, "save_pgm");
  if (maxval < 1 || maxval > 65535) throw InvalidArgument("save_pgm: maxval must be in [1, 65535]");
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const unsigned v = quantize(image.pixel(i)[0], maxval);
    if (maxval < 256) {
      bytes.push_back(static_cast<unsigned char>(v));
    } else {
      bytes.push_back(static_cast<unsigned char>(v >> 8));
      bytes.push_back(static_cast<unsigned char>(v & 0xFF));
    }
  }
  write_file(path, bytes);
}

void save_raw_float(const fs::path& path, const ImageTensor& image) {
  if (image.empty()) throw InvalidArgument("save_raw_float: empty image");
  if (image.channels() > 255 || image.height() > 65535 || image.width() > 65535) {
    throw InvalidArgument("save_raw_float: image too large for the raw header");
  }
  std::vector<unsigned char> bytes = {kRawMagic[0], kRawMagic[1], kRawMagic[2],
                                      static_cast<unsigned char>(image.channels()),
                                      static_cast<unsigned char>(image.height() & 0xFF),
                                      static_cast<unsigned char>(image.height() >> 8),
                                      static_cast<unsigned char>(image.width() & 0xFF),
                                      static_cast<unsigned char>(image.width() >> 8)};
  bytes.reserve(8 + image.data().size() * 4);
  for (double v : image.data()) {
    const float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<unsigned char>((u >> s) & 0xFF));
  }
  write_file(path, bytes);
}

void save_image(const fs::path& path, const ImageTensor& image) {
  const std::string ext = path.extension().string();
  if (ext == ".png") {
    save_png16(path, image);
  } else if (ext == ".pgm") {
    save_pgm(path, image);
  } else {
    save_raw_float(path, image);
  }
}

}  // namespace acnfa
