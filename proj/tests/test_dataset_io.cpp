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
#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <vector>

#include "acnfa/dataset_io.hpp"
#include "acnfa/error.hpp"
#include "acnfa/random.hpp"

namespace acnfa {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("acnfa_dsio_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ImageTensor ramp(int h, int w, double scale = 1.0) {
  ImageTensor img(h, w, 1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img.at(r, c) = scale * (r * w + c);
  return img;
}

void write_rgb_png(const fs::path& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, 2, 2, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_byte row[6] = {1, 2, 3, 4, 5, 6};
  png_write_row(png, row);
  png_write_row(png, row);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

TEST(ImageFiles, Png16RoundTrip) {
  TempDir dir;
  const ImageTensor img = ramp(7, 9, 1000.0);
  save_png16(dir.path() / "a.png", img);
  EXPECT_EQ(load_image(dir.path() / "a.png"), img);
}

TEST(ImageFiles, PgmRoundTripBothDepths) {
  TempDir dir;
  const ImageTensor wide = ramp(5, 4, 3000.0);
  save_pgm(dir.path() / "w.pgm", wide);
  EXPECT_EQ(load_image(dir.path() / "w.pgm"), wide);
  const ImageTensor narrow = ramp(5, 4, 10.0);
  save_pgm(dir.path() / "n.pgm", narrow, 255);
  EXPECT_EQ(load_image(dir.path() / "n.pgm"), narrow);
}

TEST(ImageFiles, PgmBytesAreBigEndian) {
  TempDir dir;
  ImageTensor img(1, 2, 1);
  img.at(0, 0) = 258;
  img.at(0, 1) = 65535;
  save_pgm(dir.path() / "x.pgm", img);
  std::ifstream in(dir.path() / "x.pgm", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  const std::string tail = bytes.substr(bytes.size() - 4);
  EXPECT_EQ(tail, std::string("\x01\x02\xff\xff", 4));
  EXPECT_EQ(bytes.rfind("P5", 0), 0u);
}

TEST(ImageFiles, ClampsAndRounds) {
  TempDir dir;
  ImageTensor img(1, 3, 1);
  img.at(0, 0) = -4.0;
  img.at(0, 1) = 2.6;
  img.at(0, 2) = 1e6;
  save_png16(dir.path() / "c.png", img);
  const ImageTensor back = load_image(dir.path() / "c.png");
  EXPECT_EQ(back.at(0, 0), 0.0);
  EXPECT_EQ(back.at(0, 1), 3.0);
  EXPECT_EQ(back.at(0, 2), 65535.0);
}

TEST(ImageFiles, RawFloatKeepsChannels) {
  TempDir dir;
  ImageTensor img(3, 2, 3);
  for (std::size_t i = 0; i < img.data().size(); ++i) img.data()[i] = 0.25 * i - 1.0;
  save_raw_float(dir.path() / "m.imf", img);
  EXPECT_EQ(fs::file_size(dir.path() / "m.imf"), 8u + 3 * 2 * 3 * 4);
  EXPECT_EQ(load_image(dir.path() / "m.imf"), img);
}

TEST(ImageFiles, RejectsColourAndGarbage) {
  TempDir dir;
  write_rgb_png(dir.path() / "rgb.png");
  EXPECT_THROW(load_image(dir.path() / "rgb.png"), FormatError);
  std::ofstream(dir.path() / "junk.png") << "not an image";
  EXPECT_THROW(load_image(dir.path() / "junk.png"), FormatError);
  std::ofstream(dir.path() / "p6.pgm") << "P6\n1 1\n255\nabc";
  EXPECT_THROW(load_image(dir.path() / "p6.pgm"), FormatError);
  EXPECT_THROW(load_image(dir.path() / "missing.png"), IoError);
}

TEST(MaskToBoxes, SolidSquare) {
  ImageTensor mask(6, 6, 1);
  for (int r = 1; r <= 3; ++r)
    for (int c = 2; c <= 4; ++c) mask.at(r, c) = 255;
  const auto boxes = mask_to_boxes(mask, "m");
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].box, (Box{2, 1, 4, 3}));
  EXPECT_EQ(boxes[0].extent, 9);
  EXPECT_EQ(boxes[0].image_id, "m");
}

TEST(MaskToBoxes, DiagonalIsOneComponent) {
  ImageTensor mask(4, 4, 1);
  for (int i = 0; i < 4; ++i) mask.at(i, i) = 1;
  const auto boxes = mask_to_boxes(mask, "d");
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].box, (Box{0, 0, 3, 3}));
  EXPECT_EQ(boxes[0].extent, 4);
}

// Recursive flood fill over a random mask as the reference.
TEST(MaskToBoxes, MatchesFloodFill) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 20, w = 25;
    ImageTensor mask(h, w, 1);
    for (double& v : mask.data()) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
    std::vector<int> label(h * w, -1);
    std::vector<GroundTruthBox> ref;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (mask.at(r, c) == 0 || label[r * w + c] >= 0) continue;
        GroundTruthBox g{"t", Box{c, r, c, r}, 0};
        std::vector<std::pair<int, int>> stack{{r, c}};
        label[r * w + c] = static_cast<int>(ref.size());
        while (!stack.empty()) {
          auto [y, x] = stack.back();
          stack.pop_back();
          ++g.extent;
          g.box.x_min = std::min(g.box.x_min, x);
          g.box.x_max = std::max(g.box.x_max, x);
          g.box.y_min = std::min(g.box.y_min, y);
          g.box.y_max = std::max(g.box.y_max, y);
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int ny = y + dy, nx = x + dx;
              if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
              if (mask.at(ny, nx) == 0 || label[ny * w + nx] >= 0) continue;
              label[ny * w + nx] = label[r * w + c];
              stack.push_back({ny, nx});
            }
          }
        }
        ref.push_back(g);
      }
    }
    EXPECT_EQ(mask_to_boxes(mask, "t"), ref) << "trial " << trial;
  }
}

TEST(MaskToBoxes, PngRoundTrip) {
  TempDir dir;
  ImageTensor mask(10, 10, 1);
  mask.at(2, 2) = mask.at(2, 3) = 255;
  mask.at(7, 8) = 255;
  save_png16(dir.path() / "mask.png", mask);
  const auto boxes = mask_to_boxes(load_image(dir.path() / "mask.png"), "x");
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[0].box, (Box{2, 2, 3, 2}));
  EXPECT_EQ(boxes[1].box, (Box{8, 7, 8, 7}));
}

std::vector<DatasetRecord> fake_records(int n) {
  std::vector<DatasetRecord> out;
  for (int i = 0; i < n; ++i) out.push_back({"r" + std::to_string(i), "img.png", "", Split::test});
  return out;
}

TEST(FilterByExtent, MatchesBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto records = fake_records(40);
    std::vector<std::vector<std::int64_t>> extents(records.size());
    for (auto& e : extents) {
      const int k = static_cast<int>(rng.below(4));
      for (int j = 0; j < k; ++j) e.push_back(1 + static_cast<std::int64_t>(rng.below(150)));
    }
    const auto res = filter_by_extent(records, extents, 90);
    std::vector<DatasetRecord> kept;
    for (std::size_t i = 0; i < records.size(); ++i) {
      bool ok = true;
      for (auto e : extents[i]) ok = ok && e <= 90;
      if (ok) kept.push_back(records[i]);
    }
    EXPECT_EQ(res.kept, kept);
    EXPECT_EQ(res.kept.size() + res.dropped.size(), records.size());
    EXPECT_DOUBLE_EQ(res.dropped_fraction,
                     static_cast<double>(res.dropped.size()) / static_cast<double>(records.size()));
  }
}

TEST(FilterByExtent, BoundaryAndIdempotence) {
  TempDir dir;
  ImageTensor img(12, 12, 1, 100.0);
  save_png16(dir.path() / "img.png", img);
  ImageTensor small(12, 12, 1), big(12, 12, 1);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 10; ++c) small.at(r, c) = 1;  // 90 pixels
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) big.at(r, c) = 1;  // 100 pixels
  save_png16(dir.path() / "small.png", small);
  save_png16(dir.path() / "big.png", big);
  std::vector<DatasetRecord> records{
      {"a", dir.path() / "img.png", dir.path() / "small.png", Split::test},
      {"b", dir.path() / "img.png", dir.path() / "big.png", Split::test},
      {"c", dir.path() / "img.png", dir.path() / "small.png", Split::test},
  };
  const auto first = filter_by_extent(records);
  ASSERT_EQ(first.kept.size(), 2u);
  EXPECT_EQ(first.kept[0].image_id, "a");
  EXPECT_EQ(first.kept[1].image_id, "c");
  EXPECT_NEAR(first.dropped_fraction, 1.0 / 3.0, 1e-15);
  records[2].mask_path.clear();
  EXPECT_THROW(filter_by_extent(records), InvalidArgument);
  const auto second = filter_by_extent(first.kept);
  EXPECT_EQ(second.kept, first.kept);
  EXPECT_EQ(second.dropped_fraction, 0.0);
}

TEST(Keys, KernelValues) {
  EXPECT_EQ(keys_kernel(0.0), 1.0);
  EXPECT_EQ(keys_kernel(1.0), 0.0);
  EXPECT_EQ(keys_kernel(2.0), 0.0);
  EXPECT_EQ(keys_kernel(0.5), 0.5625);
  EXPECT_EQ(keys_kernel(-0.5), 0.5625);
  EXPECT_EQ(keys_kernel(1.5), -0.0625);
  EXPECT_EQ(keys_kernel(3.0), 0.0);
}

TEST(Keys, PartitionOfUnity) {
  for (int i = 0; i <= 100; ++i) {
    const double f = i / 100.0;
    double s = 0, first = 0;
    for (int j = -1; j <= 2; ++j) {
      s += keys_kernel(f - j);
      first += j * keys_kernel(f - j);
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    EXPECT_NEAR(first, f, 1e-14);  // reproduces linear functions
  }
}

TEST(Bicubic, IdentityAndConstant) {
  Rng rng(2);
  ImageTensor img(9, 11, 2);
  for (double& v : img.data()) v = rng.normal();
  const ImageTensor same = bicubic_resize(img, 9, 11);
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(same.data()[i], img.data()[i], 1e-12);

  const ImageTensor flat(13, 7, 1, 42.5);
  for (auto [h, w] : {std::pair{26, 14}, std::pair{5, 3}, std::pair{17, 31}}) {
    const ImageTensor out = bicubic_resize(flat, h, w);
    for (double v : out.data()) EXPECT_NEAR(v, 42.5, 1e-12);
  }
}

// Keys with a = -0.5 reproduces quadratics away from the clamped border.
TEST(Bicubic, ReproducesQuadraticsInInterior) {
  const int in = 40, out = 100;
  auto f = [](double y, double x) { return 0.3 * x * x - 1.7 * x * y + 0.5 * y * y + 2 * x - y + 3; };
  ImageTensor img(in, in, 1);
  for (int r = 0; r < in; ++r)
    for (int c = 0; c < in; ++c) img.at(r, c) = f(r, c);
  const ImageTensor big = bicubic_resize(img, out, out);
  const double scale = static_cast<double>(in) / out;
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < out; ++c) {
      const double sy = (r + 0.5) * scale - 0.5, sx = (c + 0.5) * scale - 0.5;
      if (sy < 2 || sx < 2 || sy > in - 3 || sx > in - 3) continue;
      EXPECT_NEAR(big.at(r, c), f(sy, sx), 1e-9);
    }
  }
}

TEST(RescaleBox, OutwardRounding) {
  EXPECT_EQ(rescale_box(Box{2, 2, 4, 4}, 2.0, 2.0, 100, 100), (Box{4, 4, 9, 9}));
  EXPECT_EQ(rescale_box(Box{3, 1, 3, 1}, 0.5, 0.5, 100, 100), (Box{1, 0, 1, 0}));
  EXPECT_EQ(rescale_box(Box{0, 0, 9, 9}, 1.5, 1.5, 12, 12), (Box{0, 0, 11, 11}));
  const GroundTruthBox g = rescale_ground_truth({"i", Box{0, 0, 2, 2}, 9}, 0.5, 0.5, 10, 10);
  EXPECT_EQ(g.extent, 3);
  EXPECT_EQ(g.image_id, "i");
}

TEST(RescaleBox, CoversScaledSupport) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const int x0 = static_cast<int>(rng.below(50)), y0 = static_cast<int>(rng.below(50));
    const Box b{x0, y0, x0 + static_cast<int>(rng.below(10)), y0 + static_cast<int>(rng.below(10))};
    const double s = 0.25 + 3.0 * rng.uniform();
    const Box o = rescale_box(b, s, s, 1000, 1000);
    EXPECT_LE(o.x_min, b.x_min * s);
    EXPECT_GE(o.x_max + 1, (b.x_max + 1) * s - 1e-9);
    EXPECT_LE(o.y_min, b.y_min * s);
    EXPECT_GE(o.y_max + 1, (b.y_max + 1) * s - 1e-9);
    EXPECT_TRUE(o.valid());
  }
}

TEST(Split, SizesAndDeterminism) {
  auto count = [](const std::vector<DatasetRecord>& recs) {
    std::map<Split, int> m;
    for (const auto& r : recs) ++m[r.split];
    return m;
  };
  auto ten = count(split_dataset(fake_records(10)));
  EXPECT_EQ(ten[Split::train], 6);
  EXPECT_EQ(ten[Split::val], 2);
  EXPECT_EQ(ten[Split::test], 2);
  auto big = count(split_dataset(fake_records(427)));
  EXPECT_EQ(big[Split::train], 256);
  EXPECT_EQ(big[Split::val], 85);
  EXPECT_EQ(big[Split::test], 86);

  const auto a = split_dataset(fake_records(50), {0.6, 0.2, 0.2}, 9);
  EXPECT_EQ(a, split_dataset(fake_records(50), {0.6, 0.2, 0.2}, 9));
  std::set<std::string> ids;
  for (const auto& r : a) ids.insert(r.image_id);
  EXPECT_EQ(ids.size(), 50u);
  EXPECT_THROW(split_dataset(fake_records(3), {0.5, 0.5, 0.5}), InvalidArgument);
}

TEST(Manifest, RoundTrip) {
  TempDir dir;
  fs::create_directories(dir.path() / "images");
  save_png16(dir.path() / "images" / "a.png", ImageTensor(2, 2, 1));
  save_png16(dir.path() / "images" / "am.png", ImageTensor(2, 2, 1));
  save_png16(dir.path() / "images" / "b.png", ImageTensor(2, 2, 1));
  const std::vector<DatasetRecord> recs{
      {"a", dir.path() / "images" / "a.png", dir.path() / "images" / "am.png", Split::train},
      {"b", dir.path() / "images" / "b.png", "", Split::val},
  };
  write_manifest(dir.path() / "m.tsv", recs);
  std::ifstream in(dir.path() / "m.tsv");
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("images/a.png"), std::string::npos);
  EXPECT_EQ(text.find(dir.path().string()), std::string::npos);
  const auto back = read_manifest(dir.path() / "m.tsv");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].image_id, recs[i].image_id);
    EXPECT_EQ(fs::weakly_canonical(back[i].image_path), fs::weakly_canonical(recs[i].image_path));
    EXPECT_EQ(back[i].mask_path.empty(), recs[i].mask_path.empty());
    EXPECT_EQ(back[i].split, recs[i].split);
  }
}

TEST(Manifest, Errors) {
  TempDir dir;
  save_png16(dir.path() / "a.png", ImageTensor(2, 2, 1));
  std::ofstream(dir.path() / "dup.tsv") << "a\ta.png\t-\ttest\na\ta.png\t-\ttest\n";
  EXPECT_THROW(read_manifest(dir.path() / "dup.tsv"), FormatError);
  std::ofstream(dir.path() / "miss.tsv") << "a\tnope.png\t-\ttest\n";
  EXPECT_ANY_THROW(read_manifest(dir.path() / "miss.tsv"));
  std::ofstream(dir.path() / "split.tsv") << "a\ta.png\t-\tholdout\n";
  EXPECT_ANY_THROW(read_manifest(dir.path() / "split.tsv"));
  std::ofstream(dir.path() / "ok.tsv") << "# comment\n\na\ta.png\t-\ttest\n";
  EXPECT_EQ(read_manifest(dir.path() / "ok.tsv").size(), 1u);
}

}  // namespace
}  // namespace acnfa
