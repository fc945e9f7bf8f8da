// Copyright (c) 2026, The gazechunk Authors. All rights reserved.
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

#include "gazechunk/gazechunk.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <random>
#include <string>

#include "gazechunk/error.hpp"
#include "gazechunk/formats.hpp"
#include "gazechunk/manipulate.hpp"
#include "gazechunk/regressor.hpp"
#include "gazechunk/shiftsim.hpp"
#include "gazechunk/statedit.hpp"
#include "gazechunk/synth.hpp"

using namespace gazechunk;
using nlohmann::json;

struct gzc_dataset {
  LatentDataset data;
};

struct gzc_report {
  AnalysisReport report;
};

struct gzc_model {
  RegressorModel model;
};

namespace {

thread_local std::string last_error;

gzc_status status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInsufficientData:
      return GZC_ERR_INSUFFICIENT_DATA;
    case ErrorKind::kDivergence:
      return GZC_ERR_DIVERGENCE;
    default:
      return GZC_ERR_INPUT;
  }
}

template <class Fn>
gzc_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return GZC_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_for(e.kind());
  } catch (const json::exception& e) {
    last_error = std::string("invalid JSON: ") + e.what();
    return GZC_ERR_INPUT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GZC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GZC_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return GZC_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorKind::kConfiguration, std::string(what) + " must not be null");
}

json parse_or_null(const char* text) {
  if (text == nullptr || *text == '\0') return json();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfiguration, std::string("invalid JSON: ") + e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

SelectionMask mask_from(const LatentLayout& layout, const std::size_t* chunks, std::size_t n) {
  if (n > 0) require(chunks, "chunks");
  return SelectionMask(layout, std::vector<std::size_t>(chunks, chunks + n));
}

}  // namespace

extern "C" {

const char* gzc_version(void) { return kToolVersion; }

const char* gzc_last_error(void) { return last_error.c_str(); }

void gzc_string_free(char* s) { std::free(s); }

gzc_status gzc_dataset_load(const char* latents_path, const char* labels_path, gzc_dataset** out) {
  return guarded([&] {
    require(latents_path, "latents path");
    require(out, "out");
    auto ds = std::make_unique<gzc_dataset>();
    ds->data = labels_path != nullptr ? load_dataset(latents_path, labels_path)
                                      : load_latents_only(latents_path);
    *out = ds.release();
  });
}

gzc_status gzc_dataset_save(const gzc_dataset* ds, const char* latents_path,
                            const char* labels_path) {
  return guarded([&] {
    require(ds, "dataset");
    require(latents_path, "latents path");
    if (labels_path != nullptr)
      save_dataset(ds->data, latents_path, labels_path);
    else
      save_latents(ds->data, latents_path);
  });
}

size_t gzc_dataset_size(const gzc_dataset* ds) { return ds == nullptr ? 0 : ds->data.size(); }

void gzc_dataset_layout(const gzc_dataset* ds, size_t out[4]) {
  const LatentLayout& l = ds->data.layout();
  out[0] = l.n_layers();
  out[1] = l.layer_dim();
  out[2] = l.chunk_size();
  out[3] = l.n_chunks();
}

gzc_status gzc_dataset_labels(const gzc_dataset* ds, double* yaw_deg, double* pitch_deg) {
  return guarded([&] {
    require(ds, "dataset");
    for (std::size_t i = 0; i < ds->data.size(); ++i) {
      if (yaw_deg != nullptr) yaw_deg[i] = ds->data.label(i).yaw_deg;
      if (pitch_deg != nullptr) pitch_deg[i] = ds->data.label(i).pitch_deg;
    }
  });
}

gzc_status gzc_dataset_shuffle_labels(gzc_dataset* ds, uint64_t seed) {
  return guarded([&] {
    require(ds, "dataset");
    std::vector<GazeLabel> labels(ds->data.labels().begin(), ds->data.labels().end());
    std::mt19937_64 engine(seed);
    for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[engine() % i]);
    ds->data.set_labels(std::move(labels));
  });
}

gzc_status gzc_dataset_group_mean(const gzc_dataset* ds, double yaw_lo, double yaw_hi,
                                  gzc_dataset** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    const DegreeRange range{yaw_lo, yaw_hi};
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < ds->data.size(); ++i)
      if (range.contains(ds->data.label(i).yaw_deg)) group.push_back(i);
    auto result = std::make_unique<gzc_dataset>();
    result->data = LatentDataset(ds->data.layout());
    result->data.add("group_mean", group_mean_code(ds->data, group), GazeLabel{});
    *out = result.release();
  });
}

void gzc_dataset_free(gzc_dataset* ds) { delete ds; }

gzc_status gzc_synth_generate(const char* spec_json, gzc_dataset** out) {
  return guarded([&] {
    require(out, "out");
    const json doc = parse_or_null(spec_json);
    auto ds = std::make_unique<gzc_dataset>();
    ds->data = generate(doc.is_null() ? SynthSpec{} : synth_spec_from_json(doc));
    *out = ds.release();
  });
}

gzc_status gzc_synth_generate_pair(const char* spec_json, gzc_dataset** source,
                                   gzc_dataset** target) {
  return guarded([&] {
    require(source, "source");
    require(target, "target");
    const json doc = parse_or_null(spec_json);
    const DomainPairSpec spec =
        doc.is_null() ? default_domain_pair(0) : domain_pair_from_json(doc);
    auto [s, t] = generate_domain_pair(spec);
    auto src = std::make_unique<gzc_dataset>();
    auto tgt = std::make_unique<gzc_dataset>();
    src->data = std::move(s);
    tgt->data = std::move(t);
    *source = src.release();
    *target = tgt.release();
  });
}

gzc_status gzc_synth_preset_pair(const char* preset, uint64_t seed, char** spec_json) {
  return guarded([&] {
    require(preset, "preset");
    require(spec_json, "spec_json");
    const std::string name = preset;
    DomainPairSpec spec;
    if (name == "ablation")
      spec = default_domain_pair(seed);
    else if (name == "toy")
      spec = toy_domain_pair(seed);
    else
      fail(ErrorKind::kConfiguration, "unknown preset '" + name + "'");
    *spec_json = dup_string(domain_pair_to_json(spec).dump());
  });
}

gzc_status gzc_synth_oracle(const char* spec_json, const size_t* chunks, size_t n_chunks,
                            double* precision, double* recall) {
  return guarded([&] {
    const json doc = parse_or_null(spec_json);
    const SynthSpec spec = doc.is_null() ? SynthSpec{} : synth_spec_from_json(doc);
    const OracleScore score = oracle_report(spec, mask_from(spec.layout, chunks, n_chunks));
    if (precision != nullptr) *precision = score.precision;
    if (recall != nullptr) *recall = score.recall;
  });
}

gzc_status gzc_analyze(const gzc_dataset* ds, const char* config_json, gzc_report** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    const AnalysisConfig config = analysis_config_from_json(parse_or_null(config_json));
    auto report = std::make_unique<gzc_report>();
    report->report = analyze(ds->data, config);
    *out = report.release();
  });
}

gzc_status gzc_report_load(const char* path, gzc_report** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto report = std::make_unique<gzc_report>();
    report->report = load_report(path);
    *out = report.release();
  });
}

gzc_status gzc_report_save(const gzc_report* report, uint64_t seed, const char* path) {
  return guarded([&] {
    require(report, "report");
    require(path, "path");
    save_report(report->report, ReportMeta{seed}, path);
  });
}

gzc_status gzc_report_to_json(const gzc_report* report, uint64_t seed, char** out) {
  return guarded([&] {
    require(report, "report");
    require(out, "out");
    *out = dup_string(report_to_json(report->report, ReportMeta{seed}).dump(2));
  });
}

gzc_status gzc_report_reselect(gzc_report* report, const char* selection_json) {
  return guarded([&] {
    require(report, "report");
    const json doc = parse_or_null(selection_json);
    if (doc.is_null()) fail(ErrorKind::kConfiguration, "selection must be given");
    reselect(report->report, selection_mode_from_json(doc));
  });
}

gzc_status gzc_report_selection(const gzc_report* report, size_t* indices, size_t capacity,
                                size_t* count) {
  return guarded([&] {
    require(report, "report");
    const SelectionMask mask = report->report.selection();
    const auto idx = mask.chunk_indices();
    for (std::size_t i = 0; i < idx.size() && i < capacity; ++i) indices[i] = idx[i];
    if (count != nullptr) *count = idx.size();
  });
}

void gzc_report_ranges(const gzc_report* report, double out[4]) {
  const AnalysisConfig& c = report->report.config;
  out[0] = c.left_range.lo;
  out[1] = c.left_range.hi;
  out[2] = c.right_range.lo;
  out[3] = c.right_range.hi;
}

void gzc_report_free(gzc_report* report) { delete report; }

gzc_status gzc_manipulate(const gzc_dataset* base, const gzc_dataset* donors, int64_t donor_index,
                          const size_t* chunks, size_t n_chunks, gzc_dataset** out) {
  return guarded([&] {
    require(base, "base");
    require(donors, "donors");
    require(out, "out");
    const LatentDataset& b = base->data;
    const LatentDataset& d = donors->data;
    if (!(b.layout() == d.layout()))
      fail(ErrorKind::kStructural, "base and donor layouts differ");
    if (donor_index < 0 && d.size() != b.size())
      fail(ErrorKind::kStructural, "pairwise donors need one donor per base sample");
    if (donor_index >= 0 && static_cast<std::size_t>(donor_index) >= d.size())
      fail(ErrorKind::kConfiguration, "donor index out of range");
    const SelectionMask mask = mask_from(b.layout(), chunks, n_chunks);
    auto result = std::make_unique<gzc_dataset>();
    result->data = b;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::size_t donor = donor_index < 0 ? i : static_cast<std::size_t>(donor_index);
      replace_chunks_inplace(result->data.mutable_code(i), d.code(donor), mask);
    }
    *out = result.release();
  });
}

gzc_status gzc_model_train(const gzc_dataset* ds, const size_t* chunks, size_t n_chunks,
                           const char* config_json, gzc_model** out, char** log_json) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    const TrainConfig config = train_config_from_json(parse_or_null(config_json));
    const SelectionMask mask = mask_from(ds->data.layout(), chunks, n_chunks);
    TrainResult result = train(ds->data, mask, config);
    auto model = std::make_unique<gzc_model>(gzc_model{RegressorModel{std::move(result.params), mask}});
    if (log_json != nullptr)
      *log_json = dup_string(nlohmann::ordered_json{{"config", train_config_to_json(config)},
                                                    {"loss_curve", result.loss_curve}}
                                 .dump());
    *out = model.release();
  });
}

gzc_status gzc_model_evaluate(const gzc_model* model, const gzc_dataset* ds,
                              double* mean_error_deg) {
  return guarded([&] {
    require(model, "model");
    require(ds, "dataset");
    require(mean_error_deg, "mean_error_deg");
    *mean_error_deg = evaluate(model->model.params, ds->data, model->model.mask);
  });
}

gzc_status gzc_model_predict(const gzc_model* model, const gzc_dataset* ds, double* yaw_deg,
                             double* pitch_deg) {
  return guarded([&] {
    require(model, "model");
    require(ds, "dataset");
    std::vector<std::size_t> rows(ds->data.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const Eigen::MatrixXd pred = predict(model->model.params, ds->data, rows, model->model.mask);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      if (yaw_deg != nullptr) yaw_deg[i] = rad_to_deg(pred(0, c));
      if (pitch_deg != nullptr) pitch_deg[i] = rad_to_deg(pred(1, c));
    }
  });
}

gzc_status gzc_model_save(const gzc_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    write_file(path, encode_bundle(to_bundle(model->model)));
  });
}

gzc_status gzc_model_load(const char* path, gzc_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto model = std::make_unique<gzc_model>(gzc_model{regressor_from_bundle(decode_bundle(read_file(path)))});
    *out = model.release();
  });
}

void gzc_model_free(gzc_model* model) { delete model; }

gzc_status gzc_shiftsim_run(const char* data_json, const char* config_json,
                            const char* pipeline_path, char** result_json) {
  return guarded([&] {
    require(result_json, "result_json");
    const ShiftExperimentConfig config =
        shift_experiment_config_from_json(parse_or_null(config_json));
    const json data_doc = parse_or_null(data_json);
    const DomainPairSpec spec =
        data_doc.is_null() ? toy_domain_pair(config.seed) : domain_pair_from_json(data_doc);
    auto [source, target] = generate_domain_pair(spec);
    const DomainPair data{to_domain_data(source), to_domain_data(target)};
    const ShiftExperimentResult r = run_shift_experiment(data, config);
    if (pipeline_path != nullptr) write_file(pipeline_path, encode_bundle(to_bundle(r.params)));
    nlohmann::ordered_json doc;
    doc["tool"] = kToolName;
    doc["version"] = kToolVersion;
    doc["config"] = shift_experiment_config_to_json(config);
    doc["heldout_gaze_distortion"] = r.heldout_gaze_distortion;
    doc["heldout_reconstruction"] = r.heldout_reconstruction;
    doc["domain_gap_raw"] = r.gap_raw;
    doc["domain_gap_shifted"] = r.gap_shifted;
    doc["extractor_loss_curve"] = r.extractor_curve;
    doc["encoder_loss_curve"] = r.encoder_curve;
    *result_json = dup_string(doc.dump(2));
  });
}

gzc_status gzc_shiftsim_grad_check(uint64_t seed, size_t n_configs, double* max_rel_error) {
  return guarded([&] {
    require(max_rel_error, "max_rel_error");
    *max_rel_error = random_grad_check(seed, n_configs);
  });
}

gzc_status gzc_angular_error(double yaw1_deg, double pitch1_deg, double yaw2_deg,
                             double pitch2_deg, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = angular_error(gaze_to_vector({yaw1_deg, pitch1_deg}),
                         gaze_to_vector({yaw2_deg, pitch2_deg}));
  });
}

}  // extern "C"
