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

#include "acnfa/acnfa.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "acnfa/background.hpp"
#include "acnfa/calibrate.hpp"
#include "acnfa/dataset_io.hpp"
#include "acnfa/detect.hpp"
#include "acnfa/error.hpp"
#include "acnfa/eval.hpp"
#include "acnfa/formats.hpp"
#include "acnfa/hash.hpp"
#include "acnfa/image.hpp"
#include "acnfa/nfa.hpp"
#include "acnfa/random.hpp"
#include "acnfa/special_functions.hpp"
#include "acnfa/synth.hpp"

struct acnfa_image {
  acnfa::ImageTensor tensor;
};

struct acnfa_background {
  acnfa::BackgroundModel model;
};

struct acnfa_map {
  acnfa_map_kind kind = ACNFA_MAP_LOG10_NFA;
  int height = 0;
  int width = 0;
  double eta_test = 1.0;
  std::vector<double> values;
};

struct acnfa_detections {
  std::vector<acnfa::Detection> items;
};

struct acnfa_det_table {
  std::vector<acnfa::ScoredDetection> rows;
};

struct acnfa_gt_table {
  std::vector<acnfa::GroundTruthBox> rows;
};

struct acnfa_eval_report {
  acnfa::EvalReport report;
};

struct acnfa_scene {
  acnfa::SynthScene scene;
  acnfa_image image;
  acnfa_image mask;
};

struct acnfa_manifest {
  struct Strings {
    std::string image_path;
    std::string mask_path;
    std::string split;
  };
  std::vector<acnfa::DatasetRecord> records;
  std::vector<Strings> strings;

  void add(acnfa::DatasetRecord record) {
    strings.push_back({record.image_path.generic_string(), record.mask_path.generic_string(),
                       std::string(acnfa::to_string(record.split))});
    records.push_back(std::move(record));
  }
};

namespace {

thread_local std::string g_last_error;

struct BufferTooSmall : acnfa::Error {
  using acnfa::Error::Error;
};

acnfa_status fail(acnfa_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
acnfa_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return ACNFA_OK;
  } catch (const acnfa::InvalidArgument& e) {
    return fail(ACNFA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const acnfa::DomainError& e) {
    return fail(ACNFA_ERR_DOMAIN, e.what());
  } catch (const acnfa::DimensionError& e) {
    return fail(ACNFA_ERR_DIMENSION, e.what());
  } catch (const acnfa::DegenerateModelError& e) {
    return fail(ACNFA_ERR_DEGENERATE, e.what());
  } catch (const acnfa::IoError& e) {
    return fail(ACNFA_ERR_IO, e.what());
  } catch (const acnfa::FormatError& e) {
    return fail(ACNFA_ERR_FORMAT, e.what());
  } catch (const BufferTooSmall& e) {
    return fail(ACNFA_ERR_BUFFER_TOO_SMALL, e.what());
  } catch (const acnfa::Error& e) {
    return fail(ACNFA_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ACNFA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ACNFA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ACNFA_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw acnfa::InvalidArgument(message);
}

acnfa::Box to_box(const acnfa_box& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

acnfa_box from_box(const acnfa::Box& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

acnfa::TailMode to_tail(acnfa_tail tail) {
  switch (tail) {
    case ACNFA_TAIL_TWO_SIDED:
      return acnfa::TailMode::two_sided;
    case ACNFA_TAIL_ONE_SIDED:
      return acnfa::TailMode::one_sided_bright;
  }
  throw acnfa::InvalidArgument("unknown tail mode");
}

acnfa::BackgroundMethod to_method(acnfa_background_method method) {
  switch (method) {
    case ACNFA_BACKGROUND_EMPIRICAL:
      return acnfa::BackgroundMethod::empirical;
    case ACNFA_BACKGROUND_ROBUST:
      return acnfa::BackgroundMethod::robust;
  }
  throw acnfa::InvalidArgument("unknown background method");
}

acnfa::NfaMap as_nfa(const acnfa_map& map) {
  return {map.height, map.width, map.eta_test, map.values};
}

acnfa::SignificanceMap as_significance(const acnfa_map& map) {
  return {map.height, map.width, map.eta_test, map.values};
}

acnfa_map* wrap(const acnfa::NfaMap& map) {
  return new acnfa_map{ACNFA_MAP_LOG10_NFA, map.height, map.width, map.eta_test, map.log10_nfa};
}

acnfa_map* wrap(const acnfa::SignificanceMap& map) {
  return new acnfa_map{ACNFA_MAP_SIGNIFICANCE, map.height, map.width, map.eta_test, map.values};
}

acnfa::SceneParams to_scene_params(const acnfa_synth_params& p) {
  require(p.channels >= 1, "channels must be >= 1");
  require(p.sigma > 0.0, "sigma must be positive");
  acnfa::SceneParams sp;
  sp.height = p.height;
  sp.width = p.width;
  sp.channels = p.channels;
  sp.mean.assign(static_cast<std::size_t>(p.channels), p.mean);
  const double var = p.sigma * p.sigma;
  sp.covariance = Eigen::MatrixXd::Constant(p.channels, p.channels, p.correlation * var);
  sp.covariance.diagonal().setConstant(var);
  sp.targets_min = p.targets_min;
  sp.targets_max = p.targets_max;
  sp.amplitude = p.amplitude;
  sp.radius = p.radius;
  switch (p.profile) {
    case ACNFA_PROFILE_POINT:
      sp.profile = acnfa::TargetProfile::point;
      break;
    case ACNFA_PROFILE_GAUSSIAN_BLOB:
      sp.profile = acnfa::TargetProfile::gaussian_blob;
      break;
    default:
      throw acnfa::InvalidArgument("unknown target profile");
  }
  sp.validate();
  return sp;
}

}  // namespace

extern "C" {

const char* acnfa_version(void) { return ACNFA_VERSION_STRING; }

const char* acnfa_status_name(acnfa_status status) {
  switch (status) {
    case ACNFA_OK:
      return "ok";
    case ACNFA_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case ACNFA_ERR_DOMAIN:
      return "domain_error";
    case ACNFA_ERR_DIMENSION:
      return "dimension_error";
    case ACNFA_ERR_DEGENERATE:
      return "degenerate_model";
    case ACNFA_ERR_IO:
      return "io_error";
    case ACNFA_ERR_FORMAT:
      return "format_error";
    case ACNFA_ERR_BUFFER_TOO_SMALL:
      return "buffer_too_small";
    case ACNFA_ERR_INTERNAL:
      return "internal_error";
  }
  return "unknown";
}

const char* acnfa_last_error(void) { return g_last_error.c_str(); }

// ---- scalar kernels ----

acnfa_status acnfa_ln_gamma(double a, double* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = acnfa::ln_gamma(a);
  });
}

acnfa_status acnfa_reg_upper_gamma_q(double a, double x, double* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = acnfa::reg_upper_gamma_q(a, x);
  });
}

acnfa_status acnfa_log_reg_upper_gamma_q(double a, double x, double* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = acnfa::log_reg_upper_gamma_q(a, x);
  });
}

acnfa_status acnfa_erfc(double x, double* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = acnfa::erfc(x);
  });
}

acnfa_status acnfa_chi2_sf(double dof, double t, double* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = acnfa::chi2_sf(dof, t);
  });
}

acnfa_status acnfa_nfa_binomial(int64_t k, int64_t n, double p, double n_tests, double* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = acnfa::nfa_binomial(k, n, p, n_tests);
  });
}

acnfa_status acnfa_sigm_alpha(double significance, double alpha, double tau, double* out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = acnfa::sigm_alpha(significance, alpha, tau);
  });
}

acnfa_status acnfa_iou(const acnfa_box* a, const acnfa_box* b, double* out) {
  return guard([&] {
    require(a && b && out, "null argument");
    *out = acnfa::iou(to_box(*a), to_box(*b));
  });
}

uint64_t acnfa_fnv1a64(const void* data, size_t size) {
  if (data == nullptr) return acnfa::kFnvOffset;
  return acnfa::fnv1a64(data, size);
}

// ---- images ----

acnfa_status acnfa_image_create(int height, int width, int channels, const double* data,
                                acnfa_image** out) {
  return guard([&] {
    require(out != nullptr && data != nullptr, "null argument");
    require(height > 0 && width > 0 && channels > 0, "image dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
                          static_cast<std::size_t>(channels);
    *out = new acnfa_image{
        acnfa::ImageTensor(height, width, channels, std::vector<double>(data, data + n))};
  });
}

acnfa_status acnfa_image_load(const char* path, acnfa_image** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new acnfa_image{acnfa::load_image(path)};
  });
}

acnfa_status acnfa_image_save(const acnfa_image* image, const char* path) {
  return guard([&] {
    require(image && path, "null argument");
    acnfa::save_image(path, image->tensor);
  });
}

void acnfa_image_destroy(acnfa_image* image) { delete image; }

acnfa_status acnfa_image_shape(const acnfa_image* image, int* height, int* width, int* channels) {
  return guard([&] {
    require(image != nullptr, "null image");
    if (height) *height = image->tensor.height();
    if (width) *width = image->tensor.width();
    if (channels) *channels = image->tensor.channels();
  });
}

const double* acnfa_image_data(const acnfa_image* image) {
  return image ? image->tensor.data().data() : nullptr;
}

acnfa_status acnfa_image_resize_bicubic(const acnfa_image* image, int out_height, int out_width,
                                        acnfa_image** out) {
  return guard([&] {
    require(image && out, "null argument");
    *out = new acnfa_image{acnfa::bicubic_resize(image->tensor, out_height, out_width)};
  });
}

// ---- background ----

acnfa_status acnfa_background_estimate(const acnfa_image* image, acnfa_background_method method,
                                       double ridge, acnfa_background** out) {
  return guard([&] {
    require(image && out, "null argument");
    *out = new acnfa_background{
        acnfa::estimate_background(image->tensor, to_method(method), ridge)};
  });
}

acnfa_status acnfa_background_create(int channels, const double* mean, const double* covariance,
                                     double eta_test, double ridge, acnfa_background** out) {
  return guard([&] {
    require(mean && covariance && out, "null argument");
    require(channels > 0, "channels must be positive");
    Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mean, channels);
    Eigen::MatrixXd cov(channels, channels);
    for (int i = 0; i < channels; ++i) {
      for (int j = 0; j < channels; ++j) cov(i, j) = covariance[i * channels + j];
    }
    *out = new acnfa_background{acnfa::BackgroundModel::from_parameters(mu, cov, eta_test, ridge)};
  });
}

void acnfa_background_destroy(acnfa_background* model) { delete model; }

int acnfa_background_channels(const acnfa_background* model) {
  return model ? model->model.channels() : 0;
}

int acnfa_background_is_degenerate(const acnfa_background* model) {
  return model && model->model.degenerate() ? 1 : 0;
}

double acnfa_background_eta_test(const acnfa_background* model) {
  return model ? model->model.eta_test() : 0.0;
}

acnfa_status acnfa_background_mean(const acnfa_background* model, double* out) {
  return guard([&] {
    require(model && out, "null argument");
    const auto& m = model->model.mean();
    std::copy(m.data(), m.data() + m.size(), out);
  });
}

acnfa_status acnfa_background_covariance(const acnfa_background* model, double* out) {
  return guard([&] {
    require(model && out, "null argument");
    const auto& c = model->model.covariance();
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) *out++ = c(i, j);
    }
  });
}

acnfa_status acnfa_background_mahalanobis_sq(const acnfa_background* model, const double* pixel,
                                             int channels, double* out) {
  return guard([&] {
    require(model && pixel && out, "null argument");
    require(channels > 0, "channels must be positive");
    *out = model->model.mahalanobis_sq({pixel, static_cast<std::size_t>(channels)});
  });
}

// ---- maps ----

acnfa_status acnfa_nfa_map(const acnfa_image* image, const acnfa_background* model,
                           acnfa_tail tail, acnfa_map** out) {
  return guard([&] {
    require(image && model && out, "null argument");
    *out = wrap(acnfa::nfa_gaussian_map(image->tensor, model->model, to_tail(tail)));
  });
}

acnfa_status acnfa_significance_map(const acnfa_map* nfa, acnfa_map** out) {
  return guard([&] {
    require(nfa && out, "null argument");
    require(nfa->kind == ACNFA_MAP_LOG10_NFA, "expected a log10 NFA map");
    *out = wrap(acnfa::significance_map(as_nfa(*nfa)));
  });
}

acnfa_status acnfa_fuse_scales(const acnfa_map* const* maps, const double* weights, size_t count,
                               int height, int width, acnfa_map** out) {
  return guard([&] {
    require(maps && weights && out, "null argument");
    std::vector<acnfa::SignificanceMap> levels;
    levels.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      require(maps[i] != nullptr, "null map");
      require(maps[i]->kind == ACNFA_MAP_SIGNIFICANCE, "expected significance maps");
      levels.push_back(as_significance(*maps[i]));
    }
    auto fused = acnfa::fuse_scales(levels, {weights, count}, height, width);
    *out = wrap(fused.significance);
  });
}

void acnfa_map_destroy(acnfa_map* map) { delete map; }

acnfa_map_kind acnfa_map_get_kind(const acnfa_map* map) {
  return map ? map->kind : ACNFA_MAP_LOG10_NFA;
}

acnfa_status acnfa_map_shape(const acnfa_map* map, int* height, int* width) {
  return guard([&] {
    require(map != nullptr, "null map");
    if (height) *height = map->height;
    if (width) *width = map->width;
  });
}

double acnfa_map_eta_test(const acnfa_map* map) { return map ? map->eta_test : 0.0; }

const double* acnfa_map_values(const acnfa_map* map) {
  return map ? map->values.data() : nullptr;
}

acnfa_status acnfa_map_save(const acnfa_map* map, const char* path) {
  return guard([&] {
    require(map && path, "null argument");
    if (map->kind == ACNFA_MAP_LOG10_NFA) {
      acnfa::write_raster(path, as_nfa(*map));
    } else {
      acnfa::write_raster(path, as_significance(*map));
    }
  });
}

acnfa_status acnfa_map_load(const char* path, double eta_test, acnfa_map** out) {
  return guard([&] {
    require(path && out, "null argument");
    const auto raster = acnfa::read_raster(path);
    if (raster.magic == acnfa::kNfaRasterMagic) {
      *out = wrap(acnfa::nfa_map_from_raster(raster, eta_test));
    } else {
      *out = wrap(acnfa::significance_map_from_raster(raster, eta_test));
    }
  });
}

// ---- detection ----

void acnfa_detect_config_init(acnfa_detect_config* config) {
  if (config == nullptr) return;
  const acnfa::DetectConfig defaults;
  config->method = ACNFA_BACKGROUND_EMPIRICAL;
  config->ridge = defaults.ridge;
  config->epsilon = defaults.epsilon;
  config->connectivity = defaults.connectivity;
  config->alpha = defaults.alpha;
  config->tau = defaults.tau;
  config->scales = defaults.scales;
  config->scale_weights = nullptr;
  config->tail = ACNFA_TAIL_TWO_SIDED;
  config->background = nullptr;
}

acnfa_status acnfa_detect(const acnfa_image* image, const acnfa_detect_config* config,
                          acnfa_detections** out, acnfa_map** out_nfa) {
  return guard([&] {
    require(image && config && out, "null argument");
    acnfa::DetectConfig cfg;
    cfg.method = to_method(config->method);
    cfg.ridge = config->ridge;
    cfg.epsilon = config->epsilon;
    cfg.connectivity = config->connectivity;
    cfg.alpha = config->alpha;
    cfg.tau = config->tau;
    cfg.scales = config->scales;
    if (config->scale_weights != nullptr && config->scales > 0) {
      cfg.scale_weights.assign(config->scale_weights, config->scale_weights + config->scales);
    }
    cfg.tail = to_tail(config->tail);
    if (config->background != nullptr) cfg.background = config->background->model;
    auto result = acnfa::run_detection(image->tensor, cfg);
    auto* dets = new acnfa_detections{std::move(result.detections)};
    if (out_nfa != nullptr) {
      try {
        *out_nfa = wrap(result.nfa);
      } catch (...) {
        delete dets;
        throw;
      }
    }
    *out = dets;
  });
}

size_t acnfa_detections_count(const acnfa_detections* detections) {
  return detections ? detections->items.size() : 0;
}

acnfa_status acnfa_detections_get(const acnfa_detections* detections, size_t index,
                                  acnfa_detection* out) {
  return guard([&] {
    require(detections && out, "null argument");
    require(index < detections->items.size(), "detection index out of range");
    const auto& d = detections->items[index];
    out->box = from_box(d.box);
    out->log10_nfa = d.log10_nfa;
    out->score = d.score;
    out->pixel_count = d.pixel_count;
    out->peak_row = d.peak.row;
    out->peak_col = d.peak.col;
  });
}

void acnfa_detections_destroy(acnfa_detections* detections) { delete detections; }

// ---- tables ----

acnfa_status acnfa_det_table_create(acnfa_det_table** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = new acnfa_det_table;
  });
}

acnfa_status acnfa_det_table_read(const char* path, acnfa_det_table** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new acnfa_det_table{acnfa::read_detections_csv(std::filesystem::path(path))};
  });
}

acnfa_status acnfa_det_table_append(acnfa_det_table* table, const char* image_id,
                                    const acnfa_detections* detections) {
  return guard([&] {
    require(table && image_id && detections, "null argument");
    const std::string id(image_id);
    for (const auto& d : detections->items) table->rows.push_back(acnfa::to_scored(id, d));
  });
}

acnfa_status acnfa_det_table_write(const acnfa_det_table* table, const char* path) {
  return guard([&] {
    require(table && path, "null argument");
    acnfa::write_detections_csv(std::filesystem::path(path), table->rows);
  });
}

size_t acnfa_det_table_count(const acnfa_det_table* table) {
  return table ? table->rows.size() : 0;
}

void acnfa_det_table_destroy(acnfa_det_table* table) { delete table; }

acnfa_status acnfa_gt_table_create(acnfa_gt_table** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = new acnfa_gt_table;
  });
}

acnfa_status acnfa_gt_table_read(const char* path, acnfa_gt_table** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new acnfa_gt_table{acnfa::read_ground_truth_csv(std::filesystem::path(path))};
  });
}

acnfa_status acnfa_gt_table_append_mask(acnfa_gt_table* table, const char* image_id,
                                        const acnfa_image* mask) {
  return guard([&] {
    require(table && image_id && mask, "null argument");
    auto boxes = acnfa::mask_to_boxes(mask->tensor, image_id);
    table->rows.insert(table->rows.end(), boxes.begin(), boxes.end());
  });
}

acnfa_status acnfa_gt_table_append(acnfa_gt_table* table, const char* image_id,
                                   const acnfa_box* box, int64_t extent) {
  return guard([&] {
    require(table && image_id && box, "null argument");
    require(to_box(*box).valid(), "invalid box");
    require(extent >= 1, "extent must be >= 1");
    table->rows.push_back({image_id, to_box(*box), extent});
  });
}

acnfa_status acnfa_gt_table_append_rescaled(acnfa_gt_table* table, const acnfa_gt_table* source,
                                            double sx, double sy, int out_width, int out_height) {
  return guard([&] {
    require(table && source, "null argument");
    std::vector<acnfa::GroundTruthBox> scaled;
    scaled.reserve(source->rows.size());
    for (const auto& g : source->rows) {
      scaled.push_back(acnfa::rescale_ground_truth(g, sx, sy, out_width, out_height));
    }
    table->rows.insert(table->rows.end(), scaled.begin(), scaled.end());
  });
}

acnfa_status acnfa_gt_table_write(const acnfa_gt_table* table, const char* path) {
  return guard([&] {
    require(table && path, "null argument");
    acnfa::write_ground_truth_csv(std::filesystem::path(path), table->rows);
  });
}

size_t acnfa_gt_table_count(const acnfa_gt_table* table) {
  return table ? table->rows.size() : 0;
}

acnfa_status acnfa_gt_table_get(const acnfa_gt_table* table, size_t index, const char** image_id,
                                acnfa_box* box, int64_t* extent) {
  return guard([&] {
    require(table != nullptr, "null table");
    require(index < table->rows.size(), "row index out of range");
    const auto& g = table->rows[index];
    if (image_id) *image_id = g.image_id.c_str();
    if (box) *box = from_box(g.box);
    if (extent) *extent = g.extent;
  });
}

void acnfa_gt_table_destroy(acnfa_gt_table* table) { delete table; }

// ---- evaluation ----

acnfa_status acnfa_evaluate(const acnfa_det_table* detections, const acnfa_gt_table* ground_truth,
                            double iou_min, acnfa_eval_report** out) {
  return guard([&] {
    require(detections && ground_truth && out, "null argument");
    *out = new acnfa_eval_report{acnfa::evaluate(detections->rows, ground_truth->rows, iou_min)};
  });
}

acnfa_status acnfa_eval_report_summary(const acnfa_eval_report* report, acnfa_eval_summary* out) {
  return guard([&] {
    require(report && out, "null argument");
    const auto& r = report->report;
    *out = {r.tp, r.fp, r.fn, r.precision, r.recall, r.f1, r.ap, r.iou_min};
  });
}

size_t acnfa_eval_report_pr_count(const acnfa_eval_report* report) {
  return report ? report->report.pr_samples.size() : 0;
}

acnfa_status acnfa_eval_report_pr_sample(const acnfa_eval_report* report, size_t index,
                                         double* recall, double* precision, double* threshold) {
  return guard([&] {
    require(report != nullptr, "null report");
    require(index < report->report.pr_samples.size(), "sample index out of range");
    const auto& s = report->report.pr_samples[index];
    if (recall) *recall = s.recall;
    if (precision) *precision = s.precision;
    if (threshold) *threshold = s.threshold;
  });
}

acnfa_status acnfa_eval_report_write_pr_csv(const acnfa_eval_report* report, const char* path) {
  return guard([&] {
    require(report && path, "null argument");
    acnfa::write_pr_curve_csv(path, report->report.pr_samples);
  });
}

void acnfa_eval_report_destroy(acnfa_eval_report* report) { delete report; }

// ---- synthesis ----

void acnfa_synth_params_init(acnfa_synth_params* params) {
  if (params == nullptr) return;
  params->height = 256;
  params->width = 256;
  params->channels = 1;
  params->mean = 10000.0;
  params->sigma = 100.0;
  params->correlation = 0.0;
  params->targets_min = 1;
  params->targets_max = 1;
  params->amplitude = 5.0;
  params->radius = 2;
  params->profile = ACNFA_PROFILE_GAUSSIAN_BLOB;
}

acnfa_status acnfa_synth_scene(const acnfa_synth_params* params, uint64_t master_seed,
                               size_t index, acnfa_scene** out) {
  return guard([&] {
    require(params && out, "null argument");
    const auto sp = to_scene_params(*params);
    auto scene = acnfa::gen_scene(sp, acnfa::derive_seed(master_seed, index),
                                  acnfa::scene_id(index));
    auto* handle = new acnfa_scene{std::move(scene), {}, {}};
    handle->image.tensor = handle->scene.image;
    handle->mask.tensor = handle->scene.mask;
    *out = handle;
  });
}

const acnfa_image* acnfa_scene_image(const acnfa_scene* scene) {
  return scene ? &scene->image : nullptr;
}

const acnfa_image* acnfa_scene_mask(const acnfa_scene* scene) {
  return scene ? &scene->mask : nullptr;
}

const char* acnfa_scene_id(const acnfa_scene* scene) {
  return scene ? scene->scene.image_id.c_str() : "";
}

uint64_t acnfa_scene_seed(const acnfa_scene* scene) { return scene ? scene->scene.seed : 0; }

acnfa_status acnfa_scene_append_ground_truth(const acnfa_scene* scene, acnfa_gt_table* table) {
  return guard([&] {
    require(scene && table, "null argument");
    table->rows.insert(table->rows.end(), scene->scene.gts.begin(), scene->scene.gts.end());
  });
}

void acnfa_scene_destroy(acnfa_scene* scene) { delete scene; }

// ---- calibration ----

acnfa_status acnfa_calibrate(const acnfa_calibration_params* params, acnfa_calibration_row* rows,
                             size_t capacity, size_t* n_rows) {
  return guard([&] {
    require(params && n_rows, "null argument");
    require(rows != nullptr || capacity == 0, "null row buffer");
    require(params->sizes && params->epsilons, "null sizes or epsilons");
    acnfa::CalibrationParams cp;
    cp.sizes.assign(params->sizes, params->sizes + params->n_sizes);
    cp.epsilons.assign(params->epsilons, params->epsilons + params->n_epsilons);
    cp.trials = params->trials;
    cp.seed = params->seed;
    cp.mean = params->mean;
    cp.sigma = params->sigma;
    cp.variants.clear();
    if (params->include_known) cp.variants.push_back(acnfa::CalibrationVariant::known_model);
    if (params->include_estimated) {
      cp.variants.push_back(acnfa::CalibrationVariant::estimated_model);
    }
    cp.unit = params->count_detections ? acnfa::FalseAlarmUnit::detections
                                       : acnfa::FalseAlarmUnit::pixels;
    cp.tail = to_tail(params->tail);
    cp.validate();
    const std::size_t expected = cp.sizes.size() * cp.epsilons.size() * cp.variants.size();
    *n_rows = expected;
    if (capacity < expected) {
      throw BufferTooSmall("row buffer holds " + std::to_string(capacity) + " rows, " +
                           std::to_string(expected) + " needed");
    }
    const auto result = acnfa::calibrate(cp);
    *n_rows = result.size();
    for (std::size_t i = 0; i < result.size(); ++i) {
      const auto& r = result[i];
      rows[i] = {r.variant == acnfa::CalibrationVariant::estimated_model ? 1 : 0,
                 r.size,
                 r.epsilon,
                 r.trials,
                 r.mean,
                 r.standard_error,
                 r.empirical_standard_error,
                 r.lower,
                 r.upper,
                 r.pass ? 1 : 0};
    }
  });
}

// ---- manifests ----

acnfa_status acnfa_manifest_create(acnfa_manifest** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = new acnfa_manifest;
  });
}

acnfa_status acnfa_manifest_read(const char* path, acnfa_manifest** out) {
  return guard([&] {
    require(path && out, "null argument");
    auto records = acnfa::read_manifest(path);
    auto* m = new acnfa_manifest;
    for (auto& r : records) m->add(std::move(r));
    *out = m;
  });
}

acnfa_status acnfa_manifest_append(acnfa_manifest* manifest, const char* image_id,
                                   const char* image_path, const char* mask_path,
                                   const char* split) {
  return guard([&] {
    require(manifest && image_id && image_path && split, "null argument");
    require(*image_id != '\0', "empty image_id");
    const std::string_view sv = split;
    require(sv == "train" || sv == "val" || sv == "test", "split must be train, val or test");
    for (const auto& existing : manifest->records) {
      require(existing.image_id != image_id, "duplicate image_id");
    }
    acnfa::DatasetRecord r;
    r.image_id = image_id;
    r.image_path = image_path;
    if (mask_path != nullptr && *mask_path != '\0') r.mask_path = mask_path;
    r.split = acnfa::parse_split(split);
    manifest->add(std::move(r));
  });
}

acnfa_status acnfa_manifest_write(const acnfa_manifest* manifest, const char* path) {
  return guard([&] {
    require(manifest && path, "null argument");
    acnfa::write_manifest(path, manifest->records);
  });
}

size_t acnfa_manifest_count(const acnfa_manifest* manifest) {
  return manifest ? manifest->records.size() : 0;
}

acnfa_status acnfa_manifest_get(const acnfa_manifest* manifest, size_t index,
                                const char** image_id, const char** image_path,
                                const char** mask_path, const char** split) {
  return guard([&] {
    require(manifest != nullptr, "null manifest");
    require(index < manifest->records.size(), "record index out of range");
    if (image_id) *image_id = manifest->records[index].image_id.c_str();
    if (image_path) *image_path = manifest->strings[index].image_path.c_str();
    if (mask_path) *mask_path = manifest->strings[index].mask_path.c_str();
    if (split) *split = manifest->strings[index].split.c_str();
  });
}

acnfa_status acnfa_manifest_filter_by_extent(const acnfa_manifest* manifest, int64_t max_extent,
                                             acnfa_manifest** kept, double* dropped_fraction) {
  return guard([&] {
    require(manifest && kept, "null argument");
    auto result = acnfa::filter_by_extent(manifest->records, max_extent);
    auto* m = new acnfa_manifest;
    for (auto& r : result.kept) m->add(std::move(r));
    if (dropped_fraction) *dropped_fraction = result.dropped_fraction;
    *kept = m;
  });
}

acnfa_status acnfa_manifest_split(const acnfa_manifest* manifest, const double* ratios,
                                  uint64_t seed, acnfa_manifest** out) {
  return guard([&] {
    require(manifest && ratios && out, "null argument");
    auto records = acnfa::split_dataset(manifest->records, {ratios[0], ratios[1], ratios[2]}, seed);
    auto* m = new acnfa_manifest;
    for (auto& r : records) m->add(std::move(r));
    *out = m;
  });
}

void acnfa_manifest_destroy(acnfa_manifest* manifest) { delete manifest; }

}  // extern "C"
