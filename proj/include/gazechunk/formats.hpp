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

// On-disk formats.
//
// Latent file (all integers u32 little-endian):
//   "LGZ1" | version = 1 | n_samples | n_layers | layer_dim | chunk_size |
//   n_samples * n_layers * layer_dim float32 little-endian, row-major by sample
//
// Label file: UTF-8 CSV with header "sample_id,yaw_deg,pitch_deg", one row per
// sample in latent-file order.
//
// Report file: JSON, see schemas/report.schema.json.
//
// Tensor bundle (model and pipeline parameters):
//   "LGZT" | version = 1 | count | count * (name_len | name bytes | rows |
//   cols | rows * cols float64 little-endian, row-major)

#ifndef GAZECHUNK_FORMATS_HPP
#define GAZECHUNK_FORMATS_HPP

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gazechunk/core.hpp"
#include "gazechunk/regressor.hpp"
#include "gazechunk/shiftsim.hpp"
#include "gazechunk/statedit.hpp"
#include "gazechunk/synth.hpp"

namespace gazechunk {

inline constexpr char kToolName[] = "gazechunk";
inline constexpr char kToolVersion[] = "1.0.0";

// Latent and label files.

std::vector<std::uint8_t> encode_latents(const LatentLayout& layout, std::size_t n_samples,
                                         std::span<const double> values);

struct DecodedLatents {
  LatentLayout layout;
  std::size_t n_samples = 0;
  std::vector<double> values;
};

DecodedLatents decode_latents(std::span<const std::uint8_t> bytes);

std::string encode_labels(std::span<const std::string> ids, std::span<const GazeLabel> labels);

struct DecodedLabels {
  std::vector<std::string> ids;
  std::vector<GazeLabel> labels;
};

DecodedLabels decode_labels(const std::string& text);

void save_dataset(const LatentDataset& dataset, const std::filesystem::path& latents,
                  const std::filesystem::path& labels);
LatentDataset load_dataset(const std::filesystem::path& latents,
                           const std::filesystem::path& labels);

/// Latents only; sample ids become "0", "1", ... and labels (0, 0).
LatentDataset load_latents_only(const std::filesystem::path& latents);
void save_latents(const LatentDataset& dataset, const std::filesystem::path& latents);

// Reports.

struct ReportMeta {
  std::uint64_t seed = 0;
};

nlohmann::ordered_json report_to_json(const AnalysisReport& report, const ReportMeta& meta = {});
AnalysisReport report_from_json(const nlohmann::json& doc);

void save_report(const AnalysisReport& report, const ReportMeta& meta,
                 const std::filesystem::path& path);
AnalysisReport load_report(const std::filesystem::path& path);

// Tensor bundles.

using TensorBundle = std::vector<std::pair<std::string, Eigen::MatrixXd>>;

std::vector<std::uint8_t> encode_bundle(const TensorBundle& bundle);
TensorBundle decode_bundle(std::span<const std::uint8_t> bytes);

struct RegressorModel {
  RegressorParams params;
  SelectionMask mask;
};

TensorBundle to_bundle(const RegressorModel& model);
RegressorModel regressor_from_bundle(const TensorBundle& bundle);
TensorBundle to_bundle(const ToyPipelineParams& params);
ToyPipelineParams pipeline_from_bundle(const TensorBundle& bundle);

// JSON configuration.

/// Parses a synth spec. Missing keys keep their defaults; unknown keys are an
/// error. Chunk sets are arrays of indices or {"layers": [...]}.
SynthSpec synth_spec_from_json(const nlohmann::json& doc);

/// Source spec plus an optional "target" object of overrides. Without one the
/// target equals the source.
DomainPairSpec domain_pair_from_json(const nlohmann::json& doc);

nlohmann::ordered_json synth_spec_to_json(const SynthSpec& spec);
nlohmann::ordered_json domain_pair_to_json(const DomainPairSpec& pair);

AnalysisConfig analysis_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json analysis_config_to_json(const AnalysisConfig& config);
SelectionMode selection_mode_from_json(const nlohmann::json& doc);

TrainConfig train_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json train_config_to_json(const TrainConfig& config);

ShiftTrainConfig shift_train_config_from_json(const nlohmann::json& doc,
                                              ShiftTrainConfig defaults = {});
LossWeights loss_weights_from_json(const nlohmann::json& doc);

/// Keys: latent_dim, seed, weights, extractor, encoder. Missing keys keep the
/// ShiftExperimentConfig defaults.
ShiftExperimentConfig shift_experiment_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json shift_experiment_config_to_json(const ShiftExperimentConfig& config);

// Files.

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gazechunk

#endif  // GAZECHUNK_FORMATS_HPP
