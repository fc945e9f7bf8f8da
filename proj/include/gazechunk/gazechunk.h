/* Copyright (c) 2026, The gazechunk Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to gazechunk.
 *
 * Every fallible call returns a gzc_status. On failure the message for the
 * calling thread is available from gzc_last_error() until the next call.
 * Strings returned through char** are owned by the caller and released with
 * gzc_string_free(). Handles are released with their *_free function, which
 * accepts NULL.
 */

#ifndef GAZECHUNK_GAZECHUNK_H
#define GAZECHUNK_GAZECHUNK_H

#include <stddef.h>
#include <stdint.h>

#if defined(GZC_BUILDING_LIBRARY)
#define GZC_API __attribute__((visibility("default")))
#else
#define GZC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gzc_status {
  GZC_OK = 0,
  GZC_ERR_INTERNAL = 1,
  GZC_ERR_INPUT = 2,             /* malformed files, configs or arguments */
  GZC_ERR_INSUFFICIENT_DATA = 3, /* a group or set is too small */
  GZC_ERR_DIVERGENCE = 4         /* training produced a non-finite loss */
} gzc_status;

typedef struct gzc_dataset gzc_dataset;
typedef struct gzc_report gzc_report;
typedef struct gzc_model gzc_model;

GZC_API const char* gzc_version(void);
GZC_API const char* gzc_last_error(void);
GZC_API void gzc_string_free(char* s);

/* Datasets. labels may be NULL, in which case ids are "0", "1", ... and all
 * labels are zero. */
GZC_API gzc_status gzc_dataset_load(const char* latents_path, const char* labels_path,
                                    gzc_dataset** out);
GZC_API gzc_status gzc_dataset_save(const gzc_dataset* ds, const char* latents_path,
                                    const char* labels_path);
GZC_API size_t gzc_dataset_size(const gzc_dataset* ds);
/* out receives n_layers, layer_dim, chunk_size, n_chunks. */
GZC_API void gzc_dataset_layout(const gzc_dataset* ds, size_t out[4]);
GZC_API gzc_status gzc_dataset_labels(const gzc_dataset* ds, double* yaw_deg, double* pitch_deg);
/* Permutes labels among samples with a seeded Fisher-Yates shuffle. */
GZC_API gzc_status gzc_dataset_shuffle_labels(gzc_dataset* ds, uint64_t seed);
/* One-sample dataset holding the mean code of samples with yaw in [lo, hi]. */
GZC_API gzc_status gzc_dataset_group_mean(const gzc_dataset* ds, double yaw_lo, double yaw_hi,
                                          gzc_dataset** out);
GZC_API void gzc_dataset_free(gzc_dataset* ds);

/* Synthetic data. spec_json follows the synth spec schema; NULL means the
 * defaults. */
GZC_API gzc_status gzc_synth_generate(const char* spec_json, gzc_dataset** out);
GZC_API gzc_status gzc_synth_generate_pair(const char* spec_json, gzc_dataset** source,
                                           gzc_dataset** target);
/* preset is "ablation" (full layout) or "toy" (shift pipeline layout). */
GZC_API gzc_status gzc_synth_preset_pair(const char* preset, uint64_t seed, char** spec_json);
/* Precision and recall of chunks against the spec's planted set. */
GZC_API gzc_status gzc_synth_oracle(const char* spec_json, const size_t* chunks, size_t n_chunks,
                                    double* precision, double* recall);

/* Chunk analysis. config_json may be NULL for the defaults. */
GZC_API gzc_status gzc_analyze(const gzc_dataset* ds, const char* config_json, gzc_report** out);
GZC_API gzc_status gzc_report_load(const char* path, gzc_report** out);
GZC_API gzc_status gzc_report_save(const gzc_report* report, uint64_t seed, const char* path);
GZC_API gzc_status gzc_report_to_json(const gzc_report* report, uint64_t seed, char** json);
GZC_API gzc_status gzc_report_reselect(gzc_report* report, const char* selection_json);
/* Writes at most capacity indices; count always receives the full size. */
GZC_API gzc_status gzc_report_selection(const gzc_report* report, size_t* indices,
                                        size_t capacity, size_t* count);
/* left lo, left hi, right lo, right hi in degrees. */
GZC_API void gzc_report_ranges(const gzc_report* report, double out[4]);
GZC_API void gzc_report_free(gzc_report* report);

/* Chunk replacement. With donor_index < 0 donors are paired row by row with
 * base; otherwise row donor_index of donors is used for every base row. */
GZC_API gzc_status gzc_manipulate(const gzc_dataset* base, const gzc_dataset* donors,
                                  int64_t donor_index, const size_t* chunks, size_t n_chunks,
                                  gzc_dataset** out);

/* Regressor. log_json (nullable) receives {"loss_curve": [...]}. */
GZC_API gzc_status gzc_model_train(const gzc_dataset* ds, const size_t* chunks, size_t n_chunks,
                                   const char* config_json, gzc_model** out, char** log_json);
GZC_API gzc_status gzc_model_evaluate(const gzc_model* model, const gzc_dataset* ds,
                                      double* mean_error_deg);
/* Each output array holds gzc_dataset_size(ds) values in degrees. */
GZC_API gzc_status gzc_model_predict(const gzc_model* model, const gzc_dataset* ds,
                                     double* yaw_deg, double* pitch_deg);
GZC_API gzc_status gzc_model_save(const gzc_model* model, const char* path);
GZC_API gzc_status gzc_model_load(const char* path, gzc_model** out);
GZC_API void gzc_model_free(gzc_model* model);

/* Shift pipeline. data_json is a domain-pair spec (NULL: the toy preset with
 * config seed); config_json a shift experiment config. result_json receives
 * the losses and gaps; pipeline_path (nullable) receives the parameters. */
GZC_API gzc_status gzc_shiftsim_run(const char* data_json, const char* config_json,
                                    const char* pipeline_path, char** result_json);
GZC_API gzc_status gzc_shiftsim_grad_check(uint64_t seed, size_t n_configs, double* max_rel_error);

/* Angular error in degrees between two (yaw, pitch) gaze directions. */
GZC_API gzc_status gzc_angular_error(double yaw1_deg, double pitch1_deg, double yaw2_deg,
                                     double pitch2_deg, double* out);

#ifdef __cplusplus
}
#endif

#endif /* GAZECHUNK_GAZECHUNK_H */
