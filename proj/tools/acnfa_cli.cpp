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

// acnfa command-line tool: detect, eval, synth, calibrate and prepare.
// Talks to the library only through the C interface in acnfa/acnfa.h.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "acnfa/acnfa.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

int exit_code_for(acnfa_status status) {
  return status == ACNFA_ERR_INVALID_ARGUMENT ? kExitUsage : kExitData;
}

void check(acnfa_status status, const std::string& context) {
  if (status != ACNFA_OK) {
    throw CliError(exit_code_for(status), context + ": " + acnfa_last_error());
  }
}

template <typename T, void (*Destroy)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Destroy(p); }
};

using ImagePtr = std::unique_ptr<acnfa_image, HandleDeleter<acnfa_image, acnfa_image_destroy>>;
using BackgroundPtr =
    std::unique_ptr<acnfa_background, HandleDeleter<acnfa_background, acnfa_background_destroy>>;
using MapPtr = std::unique_ptr<acnfa_map, HandleDeleter<acnfa_map, acnfa_map_destroy>>;
using DetectionsPtr =
    std::unique_ptr<acnfa_detections, HandleDeleter<acnfa_detections, acnfa_detections_destroy>>;
using DetTablePtr =
    std::unique_ptr<acnfa_det_table, HandleDeleter<acnfa_det_table, acnfa_det_table_destroy>>;
using GtTablePtr =
    std::unique_ptr<acnfa_gt_table, HandleDeleter<acnfa_gt_table, acnfa_gt_table_destroy>>;
using ReportPtr =
    std::unique_ptr<acnfa_eval_report, HandleDeleter<acnfa_eval_report, acnfa_eval_report_destroy>>;
using ScenePtr = std::unique_ptr<acnfa_scene, HandleDeleter<acnfa_scene, acnfa_scene_destroy>>;
using ManifestPtr =
    std::unique_ptr<acnfa_manifest, HandleDeleter<acnfa_manifest, acnfa_manifest_destroy>>;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(kExitData, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t file_hash(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  return acnfa_fnv1a64(bytes.data(), bytes.size());
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << '\n';
  if (!out) throw CliError(kExitData, "cannot write " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError(kExitData, "cannot create " + dir.string() + ": " + ec.message());
}

// image ids become file names for per-image outputs
std::string file_stem(const std::string& id) {
  std::string s = id;
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  if (s.empty() || s.front() == '.') s.insert(s.begin(), '_');
  return s;
}

template <typename F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// First failure by item index, so error reporting does not depend on scheduling.
class FirstError {
 public:
  void record(std::size_t index, int code, std::string message) {
    std::lock_guard lock(mutex_);
    if (!index_ || index < *index_) {
      index_ = index;
      code_ = code;
      message_ = std::move(message);
    }
  }
  void rethrow() const {
    if (index_) throw CliError(code_, message_);
  }

 private:
  std::mutex mutex_;
  std::optional<std::size_t> index_;
  int code_ = kExitData;
  std::string message_;
};

template <typename F>
void run_item(FirstError& errors, std::size_t index, F&& body) {
  try {
    body();
  } catch (const CliError& e) {
    errors.record(index, e.code(), e.what());
  } catch (const std::exception& e) {
    errors.record(index, kExitData, e.what());
  }
}

struct ManifestRow {
  std::string image_id;
  std::string image_path;
  std::string mask_path;
  std::string split;
};

std::vector<ManifestRow> manifest_rows(const acnfa_manifest* manifest) {
  std::vector<ManifestRow> rows(acnfa_manifest_count(manifest));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const char *id, *image, *mask, *split;
    check(acnfa_manifest_get(manifest, i, &id, &image, &mask, &split), "manifest");
    rows[i] = {id, image, mask, split};
  }
  return rows;
}

// ---------------------------------------------------------------- detect

struct DetectOptions {
  std::string manifest;
  std::string out;
  std::string method = "empirical";
  double ridge = ACNFA_DEFAULT_RIDGE;
  double epsilon = 1.0;
  int connectivity = 8;
  double alpha = 1.0;
  double tau = 0.0;
  int scales = 1;
  std::vector<double> scale_weights;
  bool one_sided = false;
  std::string split = "all";
  bool save_maps = false;
  int jobs = 1;
  std::uint64_t seed = 0;
};

json detect_config_json(const DetectOptions& o) {
  return {{"manifest", o.manifest},     {"out", o.out},
          {"method", o.method},         {"ridge", o.ridge},
          {"epsilon", o.epsilon},       {"connectivity", o.connectivity},
          {"alpha", o.alpha},           {"tau", o.tau},
          {"scales", o.scales},         {"scale_weights", o.scale_weights},
          {"one_sided", o.one_sided},   {"split", o.split},
          {"save_maps", o.save_maps},   {"jobs", o.jobs},
          {"seed", o.seed}};
}

json model_json(const acnfa_background* model) {
  const int k = acnfa_background_channels(model);
  std::vector<double> mean(static_cast<std::size_t>(k));
  std::vector<double> cov(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  check(acnfa_background_mean(model, mean.data()), "background");
  check(acnfa_background_covariance(model, cov.data()), "background");
  return {{"mean", mean},
          {"covariance", cov},
          {"eta_test", acnfa_background_eta_test(model)},
          {"degenerate", acnfa_background_is_degenerate(model) != 0}};
}

struct ImageResult {
  DetectionsPtr detections;
  json report;
};

int cmd_detect(const DetectOptions& o) {
  if (!o.scale_weights.empty() && static_cast<int>(o.scale_weights.size()) != o.scales) {
    throw CliError(kExitUsage, "--scale-weights needs exactly --scales values");
  }
  acnfa_manifest* raw_manifest = nullptr;
  check(acnfa_manifest_read(o.manifest.c_str(), &raw_manifest), "reading manifest");
  ManifestPtr manifest(raw_manifest);

  std::vector<ManifestRow> rows;
  for (auto& r : manifest_rows(manifest.get())) {
    if (o.split == "all" || r.split == o.split) rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.image_id < b.image_id; });

  acnfa_detect_config config;
  acnfa_detect_config_init(&config);
  config.method = o.method == "robust" ? ACNFA_BACKGROUND_ROBUST : ACNFA_BACKGROUND_EMPIRICAL;
  config.ridge = o.ridge;
  config.epsilon = o.epsilon;
  config.connectivity = o.connectivity;
  config.alpha = o.alpha;
  config.tau = o.tau;
  config.scales = o.scales;
  config.scale_weights = o.scale_weights.empty() ? nullptr : o.scale_weights.data();
  config.tail = o.one_sided ? ACNFA_TAIL_ONE_SIDED : ACNFA_TAIL_TWO_SIDED;

  const fs::path out_dir(o.out);
  make_dir(out_dir / "per_image");
  if (o.save_maps) make_dir(out_dir / "maps");

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ImageResult> results(rows.size());
  FirstError errors;
  parallel_for(rows.size(), o.jobs, [&](std::size_t i) {
    run_item(errors, i, [&] {
      const auto& row = rows[i];
      const auto start = std::chrono::steady_clock::now();
      acnfa_image* raw_image = nullptr;
      check(acnfa_image_load(row.image_path.c_str(), &raw_image), row.image_id);
      ImagePtr image(raw_image);
      int h = 0, w = 0, k = 0;
      check(acnfa_image_shape(image.get(), &h, &w, &k), row.image_id);

      acnfa_background* raw_model = nullptr;
      check(acnfa_background_estimate(image.get(), config.method, config.ridge, &raw_model),
            row.image_id);
      BackgroundPtr model(raw_model);

      ImageResult& res = results[i];
      std::string status = "ok";
      acnfa_detections* raw_dets = nullptr;
      if (acnfa_background_is_degenerate(model.get())) {
        // Flat image: nothing can stand out against a zero-variance background.
        status = "degenerate";
        res.detections.reset();
      } else {
        acnfa_map* raw_map = nullptr;
        check(acnfa_detect(image.get(), &config, &raw_dets, o.save_maps ? &raw_map : nullptr),
              row.image_id);
        res.detections.reset(raw_dets);
        MapPtr map(raw_map);
        if (map) {
          const fs::path map_path = out_dir / "maps" / (file_stem(row.image_id) + ".nfa");
          check(acnfa_map_save(map.get(), map_path.string().c_str()), row.image_id);
        }
      }
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      res.report = {{"image_id", row.image_id},
                    {"image_path", row.image_path},
                    {"height", h},
                    {"width", w},
                    {"channels", k},
                    {"status", status},
                    {"detections", acnfa_detections_count(res.detections.get())},
                    {"seconds", seconds},
                    {"background", model_json(model.get())}};
    });
  });
  errors.rethrow();

  acnfa_det_table* raw_all = nullptr;
  check(acnfa_det_table_create(&raw_all), "detections");
  DetTablePtr all(raw_all);
  json per_image = json::array();
  std::size_t total = 0;
  std::uint64_t degenerate = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    acnfa_det_table* raw_one = nullptr;
    check(acnfa_det_table_create(&raw_one), "detections");
    DetTablePtr one(raw_one);
    if (results[i].detections) {
      check(acnfa_det_table_append(all.get(), rows[i].image_id.c_str(),
                                   results[i].detections.get()),
            rows[i].image_id);
      check(acnfa_det_table_append(one.get(), rows[i].image_id.c_str(),
                                   results[i].detections.get()),
            rows[i].image_id);
    } else {
      ++degenerate;
      std::cerr << "warning: " << rows[i].image_id << ": degenerate background, no detections\n";
    }
    const fs::path one_path = out_dir / "per_image" / (file_stem(rows[i].image_id) + ".csv");
    check(acnfa_det_table_write(one.get(), one_path.string().c_str()), "writing per-image CSV");
    total += acnfa_detections_count(results[i].detections.get());
    per_image.push_back(std::move(results[i].report));
  }
  const fs::path csv_path = out_dir / "detections.csv";
  check(acnfa_det_table_write(all.get(), csv_path.string().c_str()), "writing detections");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json report = {{"command", "detect"},
                 {"version", acnfa_version()},
                 {"config", detect_config_json(o)},
                 {"images", rows.size()},
                 {"detections", total},
                 {"degenerate_images", degenerate},
                 {"seconds", elapsed},
                 {"outputs",
                  {{"detections_csv", "detections.csv"},
                   {"content_hash", "fnv1a64:" + hex64(file_hash(csv_path))}}},
                 {"per_image", std::move(per_image)}};
  write_json(out_dir / "run_report.json", report);
  std::cout << rows.size() << " images, " << total << " detections -> " << csv_path.string()
            << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string detections;
  std::string ground_truth;
  std::string manifest;
  std::string out;
  double iou_min = ACNFA_DEFAULT_IOU_MIN;
};

GtTablePtr ground_truth_from_manifest(const std::string& path) {
  acnfa_manifest* raw_manifest = nullptr;
  check(acnfa_manifest_read(path.c_str(), &raw_manifest), "reading manifest");
  ManifestPtr manifest(raw_manifest);
  acnfa_gt_table* raw_table = nullptr;
  check(acnfa_gt_table_create(&raw_table), "ground truth");
  GtTablePtr table(raw_table);
  for (const auto& row : manifest_rows(manifest.get())) {
    if (row.mask_path.empty()) {
      throw CliError(kExitData, row.image_id + ": manifest record has no mask");
    }
    acnfa_image* raw_mask = nullptr;
    check(acnfa_image_load(row.mask_path.c_str(), &raw_mask), row.image_id);
    ImagePtr mask(raw_mask);
    check(acnfa_gt_table_append_mask(table.get(), row.image_id.c_str(), mask.get()),
          row.image_id);
  }
  return table;
}

int cmd_eval(const EvalOptions& o) {
  if (o.ground_truth.empty() == o.manifest.empty()) {
    throw CliError(kExitUsage, "eval needs exactly one of --gt or --manifest");
  }
  acnfa_det_table* raw_dets = nullptr;
  check(acnfa_det_table_read(o.detections.c_str(), &raw_dets), "reading detections");
  DetTablePtr dets(raw_dets);
  GtTablePtr gt;
  if (!o.ground_truth.empty()) {
    acnfa_gt_table* raw_gt = nullptr;
    check(acnfa_gt_table_read(o.ground_truth.c_str(), &raw_gt), "reading ground truth");
    gt.reset(raw_gt);
  } else {
    gt = ground_truth_from_manifest(o.manifest);
  }

  acnfa_eval_report* raw_report = nullptr;
  check(acnfa_evaluate(dets.get(), gt.get(), o.iou_min, &raw_report), "evaluating");
  ReportPtr report(raw_report);
  acnfa_eval_summary s;
  check(acnfa_eval_report_summary(report.get(), &s), "evaluating");

  const fs::path out_dir(o.out);
  make_dir(out_dir);
  check(acnfa_eval_report_write_pr_csv(report.get(), (out_dir / "pr_curve.csv").string().c_str()),
        "writing PR curve");

  json samples = json::array();
  for (std::size_t i = 0; i < acnfa_eval_report_pr_count(report.get()); ++i) {
    double r = 0, p = 0, t = 0;
    check(acnfa_eval_report_pr_sample(report.get(), i, &r, &p, &t), "evaluating");
    samples.push_back({{"recall", r}, {"precision", p}, {"threshold", t}});
  }
  json doc = {{"command", "eval"},
              {"version", acnfa_version()},
              {"config",
               {{"detections", o.detections},
                {"gt", o.ground_truth},
                {"manifest", o.manifest},
                {"out", o.out},
                {"iou_min", o.iou_min}}},
              {"detections", acnfa_det_table_count(dets.get())},
              {"ground_truth", acnfa_gt_table_count(gt.get())},
              {"tp", s.tp},
              {"fp", s.fp},
              {"fn", s.fn},
              {"precision", s.precision},
              {"recall", s.recall},
              {"f1", s.f1},
              {"ap", s.ap},
              {"iou_min", s.iou_min},
              {"pr_samples", std::move(samples)}};
  write_json(out_dir / "eval_report.json", doc);
  std::printf("tp=%" PRId64 " fp=%" PRId64 " fn=%" PRId64
              " precision=%.6f recall=%.6f f1=%.6f ap=%.6f\n",
              s.tp, s.fp, s.fn, s.precision, s.recall, s.f1, s.ap);
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::string out;
  int height = 256;
  int width = 256;
  int channels = 1;
  double mean = 10000.0;
  double sigma = 100.0;
  double correlation = 0.0;
  int targets_min = 1;
  int targets_max = 1;
  double amplitude = 5.0;
  int radius = 2;
  std::string profile = "blob";
  std::string format = "png";
  std::string split = "test";
  int jobs = 1;
};

int cmd_synth(const SynthOptions& o) {
  acnfa_synth_params params;
  acnfa_synth_params_init(&params);
  params.height = o.height;
  params.width = o.width;
  params.channels = o.channels;
  params.mean = o.mean;
  params.sigma = o.sigma;
  params.correlation = o.correlation;
  params.targets_min = o.targets_min;
  params.targets_max = o.targets_max;
  params.amplitude = o.amplitude;
  params.radius = o.radius;
  params.profile = o.profile == "point" ? ACNFA_PROFILE_POINT : ACNFA_PROFILE_GAUSSIAN_BLOB;

  // 16-bit formats hold a single channel; multi-channel scenes are raw float dumps.
  const std::string ext = o.channels > 1 || o.format == "raw" ? ".imf" : "." + o.format;
  const fs::path out_dir(o.out);
  make_dir(out_dir / "images");
  make_dir(out_dir / "masks");

  struct Item {
    ScenePtr scene;
    std::string rel_path;
    std::string mask_rel_path;
    std::size_t clipped = 0;
  };
  std::vector<Item> items(o.n);
  FirstError errors;
  parallel_for(o.n, o.jobs, [&](std::size_t i) {
    run_item(errors, i, [&] {
      acnfa_scene* raw_scene = nullptr;
      check(acnfa_synth_scene(&params, o.seed, i, &raw_scene), "synth");
      Item& item = items[i];
      item.scene.reset(raw_scene);
      const acnfa_image* image = acnfa_scene_image(raw_scene);
      if (ext != ".imf") {
        int h = 0, w = 0, k = 0;
        check(acnfa_image_shape(image, &h, &w, &k), "synth");
        const double* data = acnfa_image_data(image);
        const std::size_t n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                              static_cast<std::size_t>(k);
        item.clipped = static_cast<std::size_t>(std::count_if(
            data, data + n, [](double v) { return v < -0.5 || v >= 65535.5; }));
      }
      item.rel_path = "images/" + std::string(acnfa_scene_id(raw_scene)) + ext;
      check(acnfa_image_save(image, (out_dir / item.rel_path).string().c_str()), "writing image");
      item.mask_rel_path = "masks/" + std::string(acnfa_scene_id(raw_scene)) + ".png";
      check(acnfa_image_save(acnfa_scene_mask(raw_scene),
                             (out_dir / item.mask_rel_path).string().c_str()),
            "writing mask");
    });
  });
  errors.rethrow();

  acnfa_gt_table* raw_gt = nullptr;
  check(acnfa_gt_table_create(&raw_gt), "ground truth");
  GtTablePtr gt(raw_gt);
  acnfa_manifest* raw_manifest = nullptr;
  check(acnfa_manifest_create(&raw_manifest), "manifest");
  ManifestPtr manifest(raw_manifest);
  json images = json::array();
  std::size_t clipped = 0;
  for (const auto& item : items) {
    const acnfa_scene* scene = item.scene.get();
    const std::size_t before = acnfa_gt_table_count(gt.get());
    check(acnfa_scene_append_ground_truth(scene, gt.get()), "ground truth");
    const std::string path = (out_dir / item.rel_path).string();
    const std::string mask_path = (out_dir / item.mask_rel_path).string();
    check(acnfa_manifest_append(manifest.get(), acnfa_scene_id(scene), path.c_str(),
                                mask_path.c_str(), o.split.c_str()),
          "manifest");
    images.push_back({{"image_id", acnfa_scene_id(scene)},
                      {"path", item.rel_path},
                      {"mask", item.mask_rel_path},
                      {"seed", acnfa_scene_seed(scene)},
                      {"targets", acnfa_gt_table_count(gt.get()) - before}});
    clipped += item.clipped;
  }
  if (clipped > 0) {
    std::cerr << "warning: " << clipped
              << " pixel values fell outside [0, 65535] and were clipped; adjust --mean/--sigma\n";
  }
  const fs::path gt_path = out_dir / "gt.csv";
  const fs::path manifest_path = out_dir / "manifest.tsv";
  check(acnfa_gt_table_write(gt.get(), gt_path.string().c_str()), "writing ground truth");
  check(acnfa_manifest_write(manifest.get(), manifest_path.string().c_str()), "writing manifest");

  // Hash of the per-image hashes, in dataset order.
  std::vector<std::uint64_t> image_hashes;
  for (const auto& item : items) image_hashes.push_back(file_hash(out_dir / item.rel_path));
  const std::uint64_t hash =
      acnfa_fnv1a64(image_hashes.data(), image_hashes.size() * sizeof(std::uint64_t));
  json doc = {{"command", "synth"},
              {"version", acnfa_version()},
              {"config",
               {{"n", o.n},
                {"seed", o.seed},
                {"height", o.height},
                {"width", o.width},
                {"channels", o.channels},
                {"mean", o.mean},
                {"sigma", o.sigma},
                {"correlation", o.correlation},
                {"targets_min", o.targets_min},
                {"targets_max", o.targets_max},
                {"amplitude", o.amplitude},
                {"radius", o.radius},
                {"profile", o.profile},
                {"format", ext.substr(1)},
                {"split", o.split}}},
              {"seed_derivation", "scene i uses splitmix64(seed + i * 0x9E3779B97F4A7C15)"},
              {"outputs",
               {{"manifest", "manifest.tsv"},
                {"ground_truth", "gt.csv"},
                {"masks", "masks/"},
                {"images_hash", "fnv1a64:" + hex64(hash)},
                {"ground_truth_hash", "fnv1a64:" + hex64(file_hash(gt_path))}}},
              {"images", std::move(images)}};
  write_json(out_dir / "synth.json", doc);
  std::cout << o.n << " scenes, " << acnfa_gt_table_count(gt.get()) << " targets -> "
            << manifest_path.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOptions {
  std::vector<int> sizes{256};
  std::vector<double> epsilons{0.1, 1.0, 10.0};
  int trials = 100;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double sigma = 1.0;
  std::vector<std::string> variants{"known", "estimated"};
  std::string unit = "pixels";
  bool one_sided = false;
  std::string out;
};

int cmd_calibrate(const CalibrateOptions& o) {
  acnfa_calibration_params p{};
  p.sizes = o.sizes.data();
  p.n_sizes = o.sizes.size();
  p.epsilons = o.epsilons.data();
  p.n_epsilons = o.epsilons.size();
  p.trials = o.trials;
  p.seed = o.seed;
  p.mean = o.mean;
  p.sigma = o.sigma;
  p.include_known = std::count(o.variants.begin(), o.variants.end(), "known") > 0;
  p.include_estimated = std::count(o.variants.begin(), o.variants.end(), "estimated") > 0;
  p.count_detections = o.unit == "detections";
  p.tail = o.one_sided ? ACNFA_TAIL_ONE_SIDED : ACNFA_TAIL_TWO_SIDED;

  std::vector<acnfa_calibration_row> rows(o.sizes.size() * o.epsilons.size() * 2);
  std::size_t n_rows = 0;
  check(acnfa_calibrate(&p, rows.data(), rows.size(), &n_rows), "calibrating");
  rows.resize(n_rows);

  std::printf("%-9s %5s %8s %6s %10s %10s %10s %10s %4s\n", "variant", "size", "epsilon",
              "trials", "mean", "se", "lower", "upper", "pass");
  for (const auto& r : rows) {
    std::printf("%-9s %5d %8g %6d %10.4f %10.4f %10.4f %10.4f %4s\n",
                r.estimated ? "estimated" : "known", r.size, r.epsilon, r.trials, r.mean,
                r.standard_error, r.lower, r.upper, r.pass ? "yes" : "no");
  }

  if (!o.out.empty()) {
    const fs::path out_dir(o.out);
    make_dir(out_dir);
    std::ofstream csv(out_dir / "calibration.csv", std::ios::binary);
    csv << "variant,size,epsilon,trials,mean,standard_error,empirical_standard_error,lower,upper,"
           "pass\n";
    json table = json::array();
    for (const auto& r : rows) {
      const char* variant = r.estimated ? "estimated" : "known";
      csv << variant << ',' << r.size << ',' << json(r.epsilon).dump() << ',' << r.trials << ','
          << json(r.mean).dump() << ',' << json(r.standard_error).dump() << ','
          << json(r.empirical_standard_error).dump() << ',' << json(r.lower).dump() << ','
          << json(r.upper).dump() << ',' << (r.pass ? 1 : 0) << '\n';
      table.push_back({{"variant", variant},
                       {"size", r.size},
                       {"epsilon", r.epsilon},
                       {"trials", r.trials},
                       {"mean", r.mean},
                       {"standard_error", r.standard_error},
                       {"empirical_standard_error", r.empirical_standard_error},
                       {"lower", r.lower},
                       {"upper", r.upper},
                       {"pass", r.pass != 0}});
    }
    if (!csv) throw CliError(kExitData, "cannot write calibration.csv");
    json doc = {{"command", "calibrate"},
                {"version", acnfa_version()},
                {"config",
                 {{"sizes", o.sizes},
                  {"epsilons", o.epsilons},
                  {"trials", o.trials},
                  {"seed", o.seed},
                  {"mean", o.mean},
                  {"sigma", o.sigma},
                  {"variants", o.variants},
                  {"unit", o.unit},
                  {"one_sided", o.one_sided}}},
                {"rows", std::move(table)}};
    write_json(out_dir / "calibration.json", doc);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- prepare

struct PrepareOptions {
  std::string manifest;
  std::string out;
  std::int64_t max_extent = 90;
  std::vector<int> resize;  // height,width
  std::vector<double> split_ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 0;
  int jobs = 1;
};

int cmd_prepare(const PrepareOptions& o) {
  if (!o.resize.empty() && (o.resize.size() != 2 || o.resize[0] < 1 || o.resize[1] < 1)) {
    throw CliError(kExitUsage, "--resize expects HEIGHT,WIDTH");
  }
  if (o.split_ratios.size() != 3) throw CliError(kExitUsage, "--split-ratios expects 3 values");

  acnfa_manifest* raw_manifest = nullptr;
  check(acnfa_manifest_read(o.manifest.c_str(), &raw_manifest), "reading manifest");
  ManifestPtr manifest(raw_manifest);
  for (std::size_t i = 0; i < acnfa_manifest_count(manifest.get()); ++i) {
    const char* id = nullptr;
    const char* mask = nullptr;
    check(acnfa_manifest_get(manifest.get(), i, &id, nullptr, &mask, nullptr), "reading manifest");
    if (*mask == '\0') throw CliError(kExitData, std::string("record ") + id + " has no mask");
  }
  acnfa_manifest* raw_kept = nullptr;
  double dropped = 0.0;
  check(acnfa_manifest_filter_by_extent(manifest.get(), o.max_extent, &raw_kept, &dropped),
        "filtering");
  ManifestPtr kept(raw_kept);
  acnfa_manifest* raw_split = nullptr;
  check(acnfa_manifest_split(kept.get(), o.split_ratios.data(), o.seed, &raw_split), "splitting");
  ManifestPtr split(raw_split);
  const auto rows = manifest_rows(split.get());

  const fs::path out_dir(o.out);
  make_dir(out_dir);
  if (!o.resize.empty()) make_dir(out_dir / "images");

  std::vector<GtTablePtr> gts(rows.size());
  std::vector<std::string> paths(rows.size());
  FirstError errors;
  parallel_for(rows.size(), o.jobs, [&](std::size_t i) {
    run_item(errors, i, [&] {
      const auto& row = rows[i];
      acnfa_gt_table* raw_gt = nullptr;
      check(acnfa_gt_table_create(&raw_gt), "ground truth");
      GtTablePtr native(raw_gt);
      if (!row.mask_path.empty()) {
        acnfa_image* raw_mask = nullptr;
        check(acnfa_image_load(row.mask_path.c_str(), &raw_mask), row.image_id);
        ImagePtr mask(raw_mask);
        check(acnfa_gt_table_append_mask(native.get(), row.image_id.c_str(), mask.get()),
              row.image_id);
      }
      if (o.resize.empty()) {
        paths[i] = row.image_path;
        gts[i] = std::move(native);
        return;
      }
      acnfa_image* raw_image = nullptr;
      check(acnfa_image_load(row.image_path.c_str(), &raw_image), row.image_id);
      ImagePtr image(raw_image);
      int h = 0, w = 0, k = 0;
      check(acnfa_image_shape(image.get(), &h, &w, &k), row.image_id);
      acnfa_image* raw_resized = nullptr;
      check(acnfa_image_resize_bicubic(image.get(), o.resize[0], o.resize[1], &raw_resized),
            row.image_id);
      ImagePtr resized(raw_resized);
      // raw float dumps keep the interpolated values unquantized
      paths[i] = (out_dir / "images" / (file_stem(row.image_id) + ".imf")).string();
      check(acnfa_image_save(resized.get(), paths[i].c_str()), row.image_id);
      acnfa_gt_table* raw_scaled = nullptr;
      check(acnfa_gt_table_create(&raw_scaled), "ground truth");
      gts[i].reset(raw_scaled);
      check(acnfa_gt_table_append_rescaled(gts[i].get(), native.get(),
                                           static_cast<double>(o.resize[1]) / w,
                                           static_cast<double>(o.resize[0]) / h, o.resize[1],
                                           o.resize[0]),
            row.image_id);
    });
  });
  errors.rethrow();

  acnfa_gt_table* raw_all = nullptr;
  check(acnfa_gt_table_create(&raw_all), "ground truth");
  GtTablePtr all(raw_all);
  acnfa_manifest* raw_out = nullptr;
  check(acnfa_manifest_create(&raw_out), "manifest");
  ManifestPtr out_manifest(raw_out);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < acnfa_gt_table_count(gts[i].get()); ++j) {
      const char* id = nullptr;
      acnfa_box box;
      std::int64_t extent = 0;
      check(acnfa_gt_table_get(gts[i].get(), j, &id, &box, &extent), "ground truth");
      check(acnfa_gt_table_append(all.get(), id, &box, extent), "ground truth");
    }
    const char* mask = o.resize.empty() ? rows[i].mask_path.c_str() : nullptr;
    check(acnfa_manifest_append(out_manifest.get(), rows[i].image_id.c_str(), paths[i].c_str(),
                                mask, rows[i].split.c_str()),
          "manifest");
  }
  check(acnfa_gt_table_write(all.get(), (out_dir / "gt.csv").string().c_str()),
        "writing ground truth");
  check(acnfa_manifest_write(out_manifest.get(), (out_dir / "manifest.tsv").string().c_str()),
        "writing manifest");

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : rows) counts[r.split == "train" ? 0 : r.split == "val" ? 1 : 2]++;
  json doc = {{"command", "prepare"},
              {"version", acnfa_version()},
              {"config",
               {{"manifest", o.manifest},
                {"out", o.out},
                {"max_extent", o.max_extent},
                {"resize", o.resize},
                {"split_ratios", o.split_ratios},
                {"seed", o.seed}}},
              {"input_records", acnfa_manifest_count(manifest.get())},
              {"kept_records", rows.size()},
              {"dropped_fraction", dropped},
              {"splits", {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}}}};
  write_json(out_dir / "prepare.json", doc);
  std::cout << rows.size() << " of " << acnfa_manifest_count(manifest.get())
            << " records kept -> " << (out_dir / "manifest.tsv").string() << '\n';
  return kExitOk;
}

// Checked after parsing so that --print-config works without them.
void require_option(const std::string& value, const char* name) {
  if (value.empty()) throw CliError(kExitUsage, std::string(name) + " is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acnfa: a contrario small-target detection with NFA control"};
  app.set_version_flag("--version", std::string(acnfa_version()));
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file; keys go in a [subcommand] section, flags win")
      ->check(CLI::ExistingFile);
  app.allow_config_extras(CLI::config_extras_mode::error);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit")
      ->configurable(false);

  DetectOptions det;
  auto* detect = app.add_subcommand("detect", "Run the detector over a manifest");
  detect->fallthrough();
  detect->add_option("--manifest", det.manifest, "Dataset manifest (TSV)");
  detect->add_option("--out", det.out, "Output directory");
  detect->add_option("--method", det.method, "Background estimator")
      ->check(CLI::IsMember({"empirical", "robust"}))
      ->capture_default_str();
  detect->add_option("--ridge", det.ridge, "Relative covariance ridge")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  detect->add_option("--epsilon", det.epsilon, "NFA threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  detect->add_option("--connectivity", det.connectivity, "Pixel connectivity")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  detect->add_option("--alpha", det.alpha, "Score slope")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  detect->add_option("--tau", det.tau, "Score offset")->capture_default_str();
  detect->add_option("--scales", det.scales, "Pyramid levels")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  detect->add_option("--scale-weights", det.scale_weights, "Comma-separated level weights")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  detect->add_flag("--one-sided", det.one_sided, "Bright-side tail (single channel)");
  detect->add_option("--split", det.split, "Restrict to one split")
      ->check(CLI::IsMember({"all", "train", "val", "test"}))
      ->capture_default_str();
  detect->add_flag("--save-maps", det.save_maps, "Write fused log10 NFA rasters");
  detect->add_option("--jobs", det.jobs, "Worker threads")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();
  detect->add_option("--seed", det.seed, "Recorded in the run report")->capture_default_str();

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Score detections against ground truth");
  eval->fallthrough();
  eval->add_option("--detections", ev.detections, "Detections CSV");
  eval->add_option("--gt", ev.ground_truth, "Ground-truth CSV");
  eval->add_option("--manifest", ev.manifest, "Manifest with masks (instead of --gt)");
  eval->add_option("--out", ev.out, "Output directory");
  eval->add_option("--iou-min", ev.iou_min, "Minimum IoU for a match")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  SynthOptions sy;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  synth->fallthrough();
  synth->add_option("--n", sy.n, "Number of scenes")->capture_default_str();
  synth->add_option("--seed", sy.seed, "Master seed")->capture_default_str();
  synth->add_option("--out", sy.out, "Output directory");
  synth->add_option("--height", sy.height)->check(CLI::Range(1, 65535))->capture_default_str();
  synth->add_option("--width", sy.width)->check(CLI::Range(1, 65535))->capture_default_str();
  synth->add_option("--channels", sy.channels)->check(CLI::Range(1, 255))->capture_default_str();
  synth->add_option("--mean", sy.mean, "Background mean per channel")->capture_default_str();
  synth->add_option("--sigma", sy.sigma, "Background standard deviation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--correlation", sy.correlation, "Inter-channel correlation")
      ->check(CLI::Range(-1.0, 1.0))
      ->capture_default_str();
  synth->add_option("--targets-min", sy.targets_min)->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--targets-max", sy.targets_max)->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--amplitude", sy.amplitude, "Target amplitude in sigma units")
      ->capture_default_str();
  synth->add_option("--radius", sy.radius, "Blob radius")->check(CLI::Range(0, 4))
      ->capture_default_str();
  synth->add_option("--profile", sy.profile)->check(CLI::IsMember({"point", "blob"}))
      ->capture_default_str();
  synth->add_option("--format", sy.format, "Image format for single-channel scenes")
      ->check(CLI::IsMember({"png", "pgm", "raw"}))
      ->capture_default_str();
  synth->add_option("--split", sy.split, "Split recorded in the manifest")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  synth->add_option("--jobs", sy.jobs)->check(CLI::Range(1, 1024))->capture_default_str();

  CalibrateOptions ca;
  auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo audit of false-alarm control");
  calibrate->fallthrough();
  calibrate->add_option("--sizes", ca.sizes, "Square image sizes")
      ->delimiter(',')
      ->check(CLI::Range(2, 65535))
      ->capture_default_str();
  calibrate->add_option("--epsilons", ca.epsilons, "NFA thresholds")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  calibrate->add_option("--trials", ca.trials, "Images per cell")
      ->check(CLI::Range(30, 1000000))
      ->capture_default_str();
  calibrate->add_option("--seed", ca.seed)->capture_default_str();
  calibrate->add_option("--mean", ca.mean)->capture_default_str();
  calibrate->add_option("--sigma", ca.sigma)->check(CLI::PositiveNumber)->capture_default_str();
  calibrate->add_option("--variants", ca.variants)
      ->delimiter(',')
      ->check(CLI::IsMember({"known", "estimated"}))
      ->capture_default_str();
  calibrate->add_option("--unit", ca.unit, "Count false pixels or false detections")
      ->check(CLI::IsMember({"pixels", "detections"}))
      ->capture_default_str();
  calibrate->add_flag("--one-sided", ca.one_sided);
  calibrate->add_option("--out", ca.out, "Optional output directory");

  PrepareOptions pr;
  auto* prepare = app.add_subcommand("prepare", "Filter, resize and split a manifest");
  prepare->fallthrough();
  prepare->add_option("--manifest", pr.manifest);
  prepare->add_option("--out", pr.out);
  prepare->add_option("--max-extent", pr.max_extent, "Largest allowed target (pixels)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  prepare->add_option("--resize", pr.resize, "HEIGHT,WIDTH")->delimiter(',');
  prepare->add_option("--split-ratios", pr.split_ratios)->delimiter(',')->capture_default_str();
  prepare->add_option("--seed", pr.seed)->capture_default_str();
  prepare->add_option("--jobs", pr.jobs)->check(CLI::Range(1, 1024))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  if (print_config) {
    // Output is a valid --config file for the selected subcommand. Unset
    // options are left out so that reading it back does not set them.
    for (const auto* sub : app.get_subcommands()) {
      std::cout << '[' << sub->get_name() << "]\n";
      std::istringstream lines(sub->config_to_str(true, false));
      for (std::string line; std::getline(lines, line);) {
        if (line.size() < 3 || line.compare(line.size() - 3, 3, "=\"\"") != 0) {
          std::cout << line << '\n';
        }
      }
    }
    return kExitOk;
  }

  try {
    if (*detect) {
      require_option(det.manifest, "--manifest");
      require_option(det.out, "--out");
      return cmd_detect(det);
    }
    if (*eval) {
      require_option(ev.detections, "--detections");
      require_option(ev.out, "--out");
      return cmd_eval(ev);
    }
    if (*synth) {
      require_option(sy.out, "--out");
      return cmd_synth(sy);
    }
    if (*calibrate) return cmd_calibrate(ca);
    if (*prepare) {
      require_option(pr.manifest, "--manifest");
      require_option(pr.out, "--out");
      return cmd_prepare(pr);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
