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

/*
 * C interface to the acnfa library: a contrario (number of false alarms)
 * detection of small bright targets, the evaluation protocol around it and
 * synthetic data generation.
 *
 * Conventions
 *  - Every object is an opaque handle created by an acnfa_*_create / load /
 *    compute function and released with the matching acnfa_*_destroy.
 *    Destroy functions accept NULL.
 *  - Functions that can fail return acnfa_status; results go through out
 *    parameters that are left untouched on failure.
 *  - The message for the last failure on the calling thread is available from
 *    acnfa_last_error(). Handles are immutable after creation unless a
 *    function says otherwise, so concurrent reads from several threads are
 *    safe.
 *  - Images are row-major with channels interleaved; boxes use inclusive,
 *    zero-based pixel coordinates with x along columns.
 */
#ifndef ACNFA_ACNFA_H
#define ACNFA_ACNFA_H

#include <stddef.h>
#include <stdint.h>

#if defined(ACNFA_BUILDING_LIBRARY)
#define ACNFA_API __attribute__((visibility("default")))
#else
#define ACNFA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum acnfa_status {
  ACNFA_OK = 0,
  ACNFA_ERR_INVALID_ARGUMENT = 1,
  ACNFA_ERR_DOMAIN = 2,
  ACNFA_ERR_DIMENSION = 3,
  ACNFA_ERR_DEGENERATE = 4,
  ACNFA_ERR_IO = 5,
  ACNFA_ERR_FORMAT = 6,
  ACNFA_ERR_BUFFER_TOO_SMALL = 7,
  ACNFA_ERR_INTERNAL = 99
} acnfa_status;

ACNFA_API const char* acnfa_version(void);
ACNFA_API const char* acnfa_status_name(acnfa_status status);
/* Message of the last failed call on this thread ("" if none). */
ACNFA_API const char* acnfa_last_error(void);

/* ------------------------------------------------------------------------ */
/* Scalar kernels                                                            */

ACNFA_API acnfa_status acnfa_ln_gamma(double a, double* out);
/* Q(a, x) = Gamma(a, x) / Gamma(a) and its natural log. */
ACNFA_API acnfa_status acnfa_reg_upper_gamma_q(double a, double x, double* out);
ACNFA_API acnfa_status acnfa_log_reg_upper_gamma_q(double a, double x, double* out);
ACNFA_API acnfa_status acnfa_erfc(double x, double* out);
ACNFA_API acnfa_status acnfa_chi2_sf(double dof, double t, double* out);
/* n_tests * P(Bin(n, p) >= k). */
ACNFA_API acnfa_status acnfa_nfa_binomial(int64_t k, int64_t n, double p, double n_tests,
                                          double* out);
/* logistic(alpha * (significance - tau)); alpha > 0. */
ACNFA_API acnfa_status acnfa_sigm_alpha(double significance, double alpha, double tau,
                                        double* out);

typedef struct acnfa_box {
  int x_min;
  int y_min;
  int x_max;
  int y_max;
} acnfa_box;

ACNFA_API acnfa_status acnfa_iou(const acnfa_box* a, const acnfa_box* b, double* out);

/* 64-bit FNV-1a of a byte range; used for output content hashes. */
ACNFA_API uint64_t acnfa_fnv1a64(const void* data, size_t size);

/* ------------------------------------------------------------------------ */
/* Images                                                                    */

typedef struct acnfa_image acnfa_image;

/* Copies height * width * channels finite values. */
ACNFA_API acnfa_status acnfa_image_create(int height, int width, int channels,
                                          const double* data, acnfa_image** out);
/* 8/16-bit grayscale PNG, binary PGM or raw float dump; raw DN values. */
ACNFA_API acnfa_status acnfa_image_load(const char* path, acnfa_image** out);
/* By extension: .png (16-bit), .pgm (16-bit), otherwise raw float dump. */
ACNFA_API acnfa_status acnfa_image_save(const acnfa_image* image, const char* path);
ACNFA_API void acnfa_image_destroy(acnfa_image* image);
ACNFA_API acnfa_status acnfa_image_shape(const acnfa_image* image, int* height, int* width,
                                         int* channels);
/* Borrowed pointer valid for the lifetime of the handle. */
ACNFA_API const double* acnfa_image_data(const acnfa_image* image);
ACNFA_API acnfa_status acnfa_image_resize_bicubic(const acnfa_image* image, int out_height,
                                                  int out_width, acnfa_image** out);

/* ------------------------------------------------------------------------ */
/* Background model                                                          */

typedef enum acnfa_background_method {
  ACNFA_BACKGROUND_EMPIRICAL = 0,
  ACNFA_BACKGROUND_ROBUST = 1
} acnfa_background_method;

#define ACNFA_DEFAULT_RIDGE 1e-6

typedef struct acnfa_background acnfa_background;

/* A degenerate image yields a model flagged degenerate, not an error. */
ACNFA_API acnfa_status acnfa_background_estimate(const acnfa_image* image,
                                                 acnfa_background_method method, double ridge,
                                                 acnfa_background** out);
/* Known model: mean[channels], covariance[channels * channels] row-major. */
ACNFA_API acnfa_status acnfa_background_create(int channels, const double* mean,
                                               const double* covariance, double eta_test,
                                               double ridge, acnfa_background** out);
ACNFA_API void acnfa_background_destroy(acnfa_background* model);
ACNFA_API int acnfa_background_channels(const acnfa_background* model);
ACNFA_API int acnfa_background_is_degenerate(const acnfa_background* model);
ACNFA_API double acnfa_background_eta_test(const acnfa_background* model);
/* Copies channels values / channels^2 values (unregularized covariance). */
ACNFA_API acnfa_status acnfa_background_mean(const acnfa_background* model, double* out);
ACNFA_API acnfa_status acnfa_background_covariance(const acnfa_background* model, double* out);
ACNFA_API acnfa_status acnfa_background_mahalanobis_sq(const acnfa_background* model,
                                                       const double* pixel, int channels,
                                                       double* out);

/* ------------------------------------------------------------------------ */
/* NFA and significance maps                                                 */

typedef enum acnfa_tail {
  ACNFA_TAIL_TWO_SIDED = 0,
  /* Single channel only: bright-side tail. */
  ACNFA_TAIL_ONE_SIDED = 1
} acnfa_tail;

typedef enum acnfa_map_kind {
  ACNFA_MAP_LOG10_NFA = 0,
  ACNFA_MAP_SIGNIFICANCE = 1
} acnfa_map_kind;

typedef struct acnfa_map acnfa_map;

ACNFA_API acnfa_status acnfa_nfa_map(const acnfa_image* image, const acnfa_background* model,
                                     acnfa_tail tail, acnfa_map** out);
/* significance = -log10 NFA; input must be a log10 NFA map. */
ACNFA_API acnfa_status acnfa_significance_map(const acnfa_map* nfa, acnfa_map** out);
/* Weighted max over scales after nearest-neighbour upsampling to
 * height x width. All inputs must be significance maps. */
ACNFA_API acnfa_status acnfa_fuse_scales(const acnfa_map* const* maps, const double* weights,
                                         size_t count, int height, int width, acnfa_map** out);
ACNFA_API void acnfa_map_destroy(acnfa_map* map);
ACNFA_API acnfa_map_kind acnfa_map_get_kind(const acnfa_map* map);
ACNFA_API acnfa_status acnfa_map_shape(const acnfa_map* map, int* height, int* width);
ACNFA_API double acnfa_map_eta_test(const acnfa_map* map);
ACNFA_API const double* acnfa_map_values(const acnfa_map* map);
/* Float raster: "NFAL"/"SIGN" magic, uint16 LE height, uint16 LE width, f32 LE data. */
ACNFA_API acnfa_status acnfa_map_save(const acnfa_map* map, const char* path);
ACNFA_API acnfa_status acnfa_map_load(const char* path, double eta_test, acnfa_map** out);

/* ------------------------------------------------------------------------ */
/* Detection                                                                 */

typedef struct acnfa_detection {
  acnfa_box box;
  double log10_nfa; /* minimum over the component */
  double score;     /* sigm_alpha(-log10_nfa, alpha, tau) */
  int64_t pixel_count;
  int peak_row;
  int peak_col;
} acnfa_detection;

typedef struct acnfa_detect_config {
  acnfa_background_method method;
  double ridge;
  double epsilon;
  int connectivity; /* 4 or 8 */
  double alpha;
  double tau;
  int scales;                 /* pyramid levels, 1 = full resolution only */
  const double* scale_weights; /* NULL or `scales` positive values */
  acnfa_tail tail;
  const acnfa_background* background; /* optional known model (borrowed) */
} acnfa_detect_config;

/* method empirical, ridge 1e-6, epsilon 1, connectivity 8, alpha 1, tau 0,
 * one scale, two-sided, no known model. */
ACNFA_API void acnfa_detect_config_init(acnfa_detect_config* config);

typedef struct acnfa_detections acnfa_detections;

/* out_nfa is optional (may be NULL) and receives the fused log10 NFA map. */
ACNFA_API acnfa_status acnfa_detect(const acnfa_image* image, const acnfa_detect_config* config,
                                    acnfa_detections** out, acnfa_map** out_nfa);
ACNFA_API size_t acnfa_detections_count(const acnfa_detections* detections);
ACNFA_API acnfa_status acnfa_detections_get(const acnfa_detections* detections, size_t index,
                                            acnfa_detection* out);
ACNFA_API void acnfa_detections_destroy(acnfa_detections* detections);

/* ------------------------------------------------------------------------ */
/* Detection and ground-truth tables (CSV)                                   */

/* Rows: image_id,x_min,y_min,x_max,y_max,log10_nfa,score,pixel_count */
typedef struct acnfa_det_table acnfa_det_table;

ACNFA_API acnfa_status acnfa_det_table_create(acnfa_det_table** out);
ACNFA_API acnfa_status acnfa_det_table_read(const char* path, acnfa_det_table** out);
/* Appends all detections of one image (mutates the table). */
ACNFA_API acnfa_status acnfa_det_table_append(acnfa_det_table* table, const char* image_id,
                                              const acnfa_detections* detections);
ACNFA_API acnfa_status acnfa_det_table_write(const acnfa_det_table* table, const char* path);
ACNFA_API size_t acnfa_det_table_count(const acnfa_det_table* table);
ACNFA_API void acnfa_det_table_destroy(acnfa_det_table* table);

/* Rows: image_id,x_min,y_min,x_max,y_max,extent */
typedef struct acnfa_gt_table acnfa_gt_table;

ACNFA_API acnfa_status acnfa_gt_table_create(acnfa_gt_table** out);
ACNFA_API acnfa_status acnfa_gt_table_read(const char* path, acnfa_gt_table** out);
/* Appends the 8-connected components of a binary mask image as boxes. */
ACNFA_API acnfa_status acnfa_gt_table_append_mask(acnfa_gt_table* table, const char* image_id,
                                                  const acnfa_image* mask);
ACNFA_API acnfa_status acnfa_gt_table_append(acnfa_gt_table* table, const char* image_id,
                                             const acnfa_box* box, int64_t extent);
/* Appends every row of `source` with boxes rescaled by (sx, sy), rounded outward. */
ACNFA_API acnfa_status acnfa_gt_table_append_rescaled(acnfa_gt_table* table,
                                                      const acnfa_gt_table* source, double sx,
                                                      double sy, int out_width, int out_height);
ACNFA_API acnfa_status acnfa_gt_table_write(const acnfa_gt_table* table, const char* path);
ACNFA_API size_t acnfa_gt_table_count(const acnfa_gt_table* table);
/* image_id pointer is borrowed from the table. */
ACNFA_API acnfa_status acnfa_gt_table_get(const acnfa_gt_table* table, size_t index,
                                          const char** image_id, acnfa_box* box,
                                          int64_t* extent);
ACNFA_API void acnfa_gt_table_destroy(acnfa_gt_table* table);

/* ------------------------------------------------------------------------ */
/* Evaluation                                                                */

#define ACNFA_DEFAULT_IOU_MIN 0.05

typedef struct acnfa_eval_summary {
  int64_t tp;
  int64_t fp;
  int64_t fn;
  double precision;
  double recall;
  double f1;
  double ap;
  double iou_min;
} acnfa_eval_summary;

typedef struct acnfa_eval_report acnfa_eval_report;

ACNFA_API acnfa_status acnfa_evaluate(const acnfa_det_table* detections,
                                      const acnfa_gt_table* ground_truth, double iou_min,
                                      acnfa_eval_report** out);
ACNFA_API acnfa_status acnfa_eval_report_summary(const acnfa_eval_report* report,
                                                 acnfa_eval_summary* out);
ACNFA_API size_t acnfa_eval_report_pr_count(const acnfa_eval_report* report);
ACNFA_API acnfa_status acnfa_eval_report_pr_sample(const acnfa_eval_report* report, size_t index,
                                                   double* recall, double* precision,
                                                   double* threshold);
/* Writes the `recall,precision` CSV. */
ACNFA_API acnfa_status acnfa_eval_report_write_pr_csv(const acnfa_eval_report* report,
                                                      const char* path);
ACNFA_API void acnfa_eval_report_destroy(acnfa_eval_report* report);

/* ------------------------------------------------------------------------ */
/* Synthetic scenes                                                          */

typedef enum acnfa_profile {
  ACNFA_PROFILE_POINT = 0,
  ACNFA_PROFILE_GAUSSIAN_BLOB = 1
} acnfa_profile;

typedef struct acnfa_synth_params {
  int height;
  int width;
  int channels;
  double mean;        /* per channel */
  double sigma;       /* per channel standard deviation */
  double correlation; /* between channels, covariance sigma^2 ((1-rho) I + rho 11^T) */
  int targets_min;
  int targets_max;
  double amplitude; /* in background sigma units */
  int radius;       /* 0..4 */
  acnfa_profile profile;
} acnfa_synth_params;

/* 256x256x1, mean 10000, sigma 100, no correlation, one gaussian blob of
 * amplitude 5 and radius 2. */
ACNFA_API void acnfa_synth_params_init(acnfa_synth_params* params);

typedef struct acnfa_scene acnfa_scene;

/* Scene `index` of the dataset generated from master_seed. */
ACNFA_API acnfa_status acnfa_synth_scene(const acnfa_synth_params* params, uint64_t master_seed,
                                         size_t index, acnfa_scene** out);
/* Borrowed from the scene. */
ACNFA_API const acnfa_image* acnfa_scene_image(const acnfa_scene* scene);
/* Single channel, 255 on target support and 0 elsewhere. */
ACNFA_API const acnfa_image* acnfa_scene_mask(const acnfa_scene* scene);
ACNFA_API const char* acnfa_scene_id(const acnfa_scene* scene);
ACNFA_API uint64_t acnfa_scene_seed(const acnfa_scene* scene);
ACNFA_API acnfa_status acnfa_scene_append_ground_truth(const acnfa_scene* scene,
                                                       acnfa_gt_table* table);
ACNFA_API void acnfa_scene_destroy(acnfa_scene* scene);

/* ------------------------------------------------------------------------ */
/* Calibration audit                                                         */

typedef struct acnfa_calibration_params {
  const int* sizes;
  size_t n_sizes;
  const double* epsilons;
  size_t n_epsilons;
  int trials; /* >= 30 */
  uint64_t seed;
  double mean;
  double sigma;
  int include_known;     /* nonzero: run the known-model variant */
  int include_estimated; /* nonzero: run the estimated-model variant */
  int count_detections;  /* nonzero: count components instead of pixels */
  acnfa_tail tail;
} acnfa_calibration_params;

typedef struct acnfa_calibration_row {
  int estimated; /* 0 known model, 1 estimated model */
  int size;
  double epsilon;
  int trials;
  double mean;
  double standard_error;
  double empirical_standard_error;
  double lower;
  double upper;
  int pass;
} acnfa_calibration_row;

/* Writes up to `capacity` rows; *n_rows receives the number of rows produced.
 * Returns ACNFA_ERR_BUFFER_TOO_SMALL when capacity is insufficient. */
ACNFA_API acnfa_status acnfa_calibrate(const acnfa_calibration_params* params,
                                       acnfa_calibration_row* rows, size_t capacity,
                                       size_t* n_rows);

/* ------------------------------------------------------------------------ */
/* Dataset manifests                                                         */

/* Lines: image_id<TAB>image_path<TAB>mask_path<TAB>split */
typedef struct acnfa_manifest acnfa_manifest;

ACNFA_API acnfa_status acnfa_manifest_create(acnfa_manifest** out);
ACNFA_API acnfa_status acnfa_manifest_read(const char* path, acnfa_manifest** out);
/* mask_path may be NULL or ""; split is "train", "val" or "test". */
ACNFA_API acnfa_status acnfa_manifest_append(acnfa_manifest* manifest, const char* image_id,
                                             const char* image_path, const char* mask_path,
                                             const char* split);
ACNFA_API acnfa_status acnfa_manifest_write(const acnfa_manifest* manifest, const char* path);
ACNFA_API size_t acnfa_manifest_count(const acnfa_manifest* manifest);
/* Borrowed strings; mask_path is "" when absent. Any out pointer may be NULL. */
ACNFA_API acnfa_status acnfa_manifest_get(const acnfa_manifest* manifest, size_t index,
                                          const char** image_id, const char** image_path,
                                          const char** mask_path, const char** split);
/* Keeps records whose mask components are all <= max_extent pixels. */
ACNFA_API acnfa_status acnfa_manifest_filter_by_extent(const acnfa_manifest* manifest,
                                                       int64_t max_extent, acnfa_manifest** kept,
                                                       double* dropped_fraction);
/* Seeded shuffle then floor/floor/remainder partition by ratios[3]. */
ACNFA_API acnfa_status acnfa_manifest_split(const acnfa_manifest* manifest, const double* ratios,
                                            uint64_t seed, acnfa_manifest** out);
ACNFA_API void acnfa_manifest_destroy(acnfa_manifest* manifest);

#ifdef __cplusplus
}
#endif

#endif /* ACNFA_ACNFA_H */
