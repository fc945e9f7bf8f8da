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

#include "gazechunk/formats.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace gazechunk {

using Eigen::Index;
using Eigen::MatrixXd;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::uint32_t kFormatVersion = 1;

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* s, std::size_t n) { bytes_.insert(bytes_.end(), s, s + n); }
  void reserve(std::size_t n) { bytes_.reserve(n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::kFormat, "unexpected end of file");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max())
    fail(ErrorKind::kFormat, std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
    fail(ErrorKind::kFormat, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_latents(const LatentLayout& layout, std::size_t n_samples,
                                         std::span<const double> values) {
  if (values.size() != n_samples * layout.total_dims())
    fail(ErrorKind::kStructural, "latent payload size does not match the header");
  ByteWriter w;
  w.reserve(24 + values.size() * 4);
  w.raw("LGZ1", 4);
  w.u32(kFormatVersion);
  w.u32(checked_u32(n_samples, "n_samples"));
  w.u32(checked_u32(layout.n_layers(), "n_layers"));
  w.u32(checked_u32(layout.layer_dim(), "layer_dim"));
  w.u32(checked_u32(layout.chunk_size(), "chunk_size"));
  for (double v : values) w.f32(static_cast<float>(v));
  return w.take();
}

DecodedLatents decode_latents(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.str(4) != "LGZ1") fail(ErrorKind::kFormat, "not a latent file (bad magic)");
  if (const auto version = r.u32(); version != kFormatVersion)
    fail(ErrorKind::kFormat, "unsupported latent file version " + std::to_string(version));
  const std::size_t n = r.u32();
  const std::size_t n_layers = r.u32();
  const std::size_t layer_dim = r.u32();
  const std::size_t chunk_size = r.u32();
  if (n_layers == 0 || layer_dim == 0 || chunk_size == 0 || layer_dim % chunk_size != 0)
    fail(ErrorKind::kFormat, "latent file declares an invalid layout");
  DecodedLatents out{LatentLayout(n_layers, layer_dim, chunk_size), n, {}};
  const std::size_t count = n * out.layout.total_dims();
  if (r.remaining() != count * 4)
    fail(ErrorKind::kFormat, "latent payload is " + std::to_string(r.remaining()) +
                                 " bytes, header declares " + std::to_string(count * 4));
  out.values.resize(count);
  for (double& v : out.values) {
    v = r.f32();
    if (!std::isfinite(v)) fail(ErrorKind::kFormat, "latent file contains a non-finite value");
  }
  return out;
}

std::string encode_labels(std::span<const std::string> ids, std::span<const GazeLabel> labels) {
  if (ids.size() != labels.size()) fail(ErrorKind::kStructural, "id and label counts differ");
  std::string out = "sample_id,yaw_deg,pitch_deg\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].find_first_of(",\r\n") != std::string::npos)
      fail(ErrorKind::kFormat, "sample id '" + ids[i] + "' contains a separator");
    out += ids[i];
    out += ',';
    out += format_double(labels[i].yaw_deg);
    out += ',';
    out += format_double(labels[i].pitch_deg);
    out += '\n';
  }
  return out;
}

DecodedLabels decode_labels(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  DecodedLabels out;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line != "sample_id,yaw_deg,pitch_deg")
        fail(ErrorKind::kFormat, "label file header must be 'sample_id,yaw_deg,pitch_deg'");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      fail(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": expected 3 fields");
    GazeLabel label{parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line_no),
                    parse_double(std::string_view(line).substr(c2 + 1), line_no)};
    try {
      validate(label);
    } catch (const Error& e) {
      fail(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": " + e.what());
    }
    out.ids.push_back(line.substr(0, c1));
    out.labels.push_back(label);
  }
  if (header) fail(ErrorKind::kFormat, "label file is empty");
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_latents(const LatentDataset& dataset, const std::filesystem::path& latents) {
  write_file(latents, encode_latents(dataset.layout(), dataset.size(), dataset.raw_values()));
}

void save_dataset(const LatentDataset& dataset, const std::filesystem::path& latents,
                  const std::filesystem::path& labels) {
  save_latents(dataset, latents);
  write_text(labels, encode_labels(dataset.ids(), dataset.labels()));
}

LatentDataset load_dataset(const std::filesystem::path& latents,
                           const std::filesystem::path& labels) {
  const DecodedLatents lat = decode_latents(read_file(latents));
  const DecodedLabels lab = decode_labels(read_text(labels));
  if (lab.ids.size() != lat.n_samples)
    fail(ErrorKind::kStructural, "label file has " + std::to_string(lab.ids.size()) +
                                     " rows, latent file has " + std::to_string(lat.n_samples) +
                                     " samples");
  LatentDataset ds(lat.layout);
  ds.reserve(lat.n_samples);
  const std::size_t d = lat.layout.total_dims();
  for (std::size_t i = 0; i < lat.n_samples; ++i)
    ds.add(lab.ids[i], std::span(lat.values).subspan(i * d, d), lab.labels[i]);
  return ds;
}

LatentDataset load_latents_only(const std::filesystem::path& latents) {
  const DecodedLatents lat = decode_latents(read_file(latents));
  LatentDataset ds(lat.layout);
  ds.reserve(lat.n_samples);
  const std::size_t d = lat.layout.total_dims();
  for (std::size_t i = 0; i < lat.n_samples; ++i)
    ds.add(std::to_string(i), std::span(lat.values).subspan(i * d, d), GazeLabel{});
  return ds;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

DegreeRange range_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(ErrorKind::kConfiguration, std::string(what) + " must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
T number(const json& j, const char* what) {
  if (!j.is_number()) fail(ErrorKind::kConfiguration, std::string(what) + " must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer() || (j.is_number_integer() && j.get<long long>() < 0))
      fail(ErrorKind::kConfiguration, std::string(what) + " must be a non-negative integer");
  }
  return j.get<T>();
}

void reject_unknown(const json& doc, std::initializer_list<const char*> allowed, const char* what) {
  if (!doc.is_object()) fail(ErrorKind::kConfiguration, std::string(what) + " must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(ErrorKind::kConfiguration, std::string("unknown key '") + it.key() + "' in " + what);
  }
}

std::vector<std::size_t> chunks_from_json(const json& j, const LatentLayout& layout) {
  std::vector<std::size_t> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(number<std::size_t>(v, "chunk index"));
    return out;
  }
  reject_unknown(j, {"layers"}, "chunk set");
  if (!j.contains("layers") || !j["layers"].is_array())
    fail(ErrorKind::kConfiguration, "chunk set object needs a 'layers' array");
  const std::size_t per_layer = layout.chunks_per_layer();
  for (const auto& l : j["layers"]) {
    const auto layer = number<std::size_t>(l, "layer");
    if (layer >= layout.n_layers()) fail(ErrorKind::kConfiguration, "layer index out of range");
    for (std::size_t c = 0; c < per_layer; ++c) out.push_back(layer * per_layer + c);
  }
  return out;
}

}  // namespace

SelectionMode selection_mode_from_json(const json& doc) {
  reject_unknown(doc, {"mode", "count", "level"}, "selection");
  const std::string mode = doc.value("mode", "top_n");
  if (mode == "top_n") return SelectionMode::top_n(number<std::size_t>(doc.at("count"), "count"));
  if (mode == "alpha") {
    const double level = number<double>(doc.at("level"), "level");
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::kConfiguration, "alpha level must lie in (0, 1)");
    return SelectionMode::alpha_level(level);
  }
  fail(ErrorKind::kConfiguration, "selection mode must be 'top_n' or 'alpha'");
}

namespace {

ordered_json selection_mode_to_json(const SelectionMode& mode) {
  if (mode.kind == SelectionMode::Kind::kTopN) return {{"mode", "top_n"}, {"count", mode.count}};
  return {{"mode", "alpha"}, {"level", mode.alpha}};
}

}  // namespace

AnalysisConfig analysis_config_from_json(const json& doc) {
  AnalysisConfig cfg;
  if (doc.is_null()) return cfg;
  reject_unknown(doc, {"left_range", "right_range", "selection"}, "analysis config");
  if (doc.contains("left_range")) cfg.left_range = range_from_json(doc["left_range"], "left_range");
  if (doc.contains("right_range")) cfg.right_range = range_from_json(doc["right_range"], "right_range");
  if (doc.contains("selection")) cfg.selection = selection_mode_from_json(doc["selection"]);
  return cfg;
}

ordered_json analysis_config_to_json(const AnalysisConfig& config) {
  return {{"left_range", {config.left_range.lo, config.left_range.hi}},
          {"right_range", {config.right_range.lo, config.right_range.hi}},
          {"selection", selection_mode_to_json(config.selection)}};
}

ordered_json report_to_json(const AnalysisReport& report, const ReportMeta& meta) {
  ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["seed"] = meta.seed;
  doc["config"] = analysis_config_to_json(report.config);
  doc["layout"] = {{"n_layers", report.layout.n_layers()},
                   {"layer_dim", report.layout.layer_dim()},
                   {"chunk_size", report.layout.chunk_size()},
                   {"n_chunks", report.layout.n_chunks()}};
  doc["split"] = {{"n_left", report.n_left},
                  {"n_right", report.n_right},
                  {"n_excluded", report.n_excluded}};
  doc["selection_mode"] =
      report.config.selection.kind == SelectionMode::Kind::kTopN ? "top_n" : "alpha";
  doc["n_selected"] = std::count(report.selected.begin(), report.selected.end(), true);
  doc["warnings"] = report.warnings;
  ordered_json chunks = ordered_json::array();
  for (std::size_t c = 0; c < report.n_chunks(); ++c) {
    chunks.push_back({{"index", c},
                      {"layer", report.layout.layer_of_chunk(c)},
                      {"mean_L", report.mean_left[c]},
                      {"mean_R", report.mean_right[c]},
                      {"var_L", report.var_left[c]},
                      {"var_R", report.var_right[c]},
                      {"mean_diff", report.mean_difference[c]},
                      {"t", report.t_stat[c]},
                      {"p", report.p_value[c]},
                      {"rank", report.rank[c]},
                      {"selected", static_cast<bool>(report.selected[c])}});
  }
  doc["chunks"] = std::move(chunks);
  return doc;
}

AnalysisReport report_from_json(const json& doc) {
  try {
    AnalysisReport r;
    reject_unknown(doc,
                   {"tool", "version", "seed", "config", "layout", "split", "selection_mode",
                    "n_selected", "warnings", "chunks"},
                   "report");
    const auto& lay = doc.at("layout");
    reject_unknown(lay, {"n_layers", "layer_dim", "chunk_size", "n_chunks"}, "report layout");
    r.layout = LatentLayout(lay.at("n_layers").get<std::size_t>(),
                            lay.at("layer_dim").get<std::size_t>(),
                            lay.at("chunk_size").get<std::size_t>());
    r.config = analysis_config_from_json(doc.at("config"));
    const auto& split = doc.at("split");
    reject_unknown(split, {"n_left", "n_right", "n_excluded"}, "report split");
    r.n_left = split.at("n_left").get<std::size_t>();
    r.n_right = split.at("n_right").get<std::size_t>();
    r.n_excluded = split.at("n_excluded").get<std::size_t>();
    for (const auto& w : doc.value("warnings", json::array())) r.warnings.push_back(w.get<std::string>());

    const auto& chunks = doc.at("chunks");
    const std::size_t k = r.layout.n_chunks();
    if (!chunks.is_array() || chunks.size() != k)
      fail(ErrorKind::kFormat, "report must hold one record per chunk");
    std::vector<bool> seen_rank(k + 1, false);
    for (std::size_t c = 0; c < k; ++c) {
      const auto& rec = chunks[c];
      reject_unknown(rec,
                     {"index", "layer", "mean_L", "mean_R", "var_L", "var_R", "mean_diff", "t", "p",
                      "rank", "selected"},
                     "report chunk record");
      if (rec.at("index").get<std::size_t>() != c)
        fail(ErrorKind::kFormat, "report chunk records must be ordered by index");
      r.mean_left.push_back(rec.at("mean_L").get<double>());
      r.mean_right.push_back(rec.at("mean_R").get<double>());
      r.var_left.push_back(rec.at("var_L").get<double>());
      r.var_right.push_back(rec.at("var_R").get<double>());
      r.mean_difference.push_back(rec.contains("mean_diff") ? rec["mean_diff"].get<double>()
                                                             : r.mean_left.back() - r.mean_right.back());
      r.t_stat.push_back(rec.at("t").get<double>());
      r.p_value.push_back(rec.at("p").get<double>());
      const auto rank = rec.at("rank").get<std::size_t>();
      if (rank < 1 || rank > k || seen_rank[rank])
        fail(ErrorKind::kFormat, "report ranks must be a permutation of 1..n_chunks");
      seen_rank[rank] = true;
      r.rank.push_back(rank);
      r.selected.push_back(rec.at("selected").get<bool>());
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("malformed report: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kFormat) throw;
    fail(ErrorKind::kFormat, std::string("malformed report: ") + e.what());
  }
}

void save_report(const AnalysisReport& report, const ReportMeta& meta,
                 const std::filesystem::path& path) {
  write_text(path, report_to_json(report, meta).dump(2) + "\n");
}

AnalysisReport load_report(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(doc);
}

SynthSpec synth_spec_from_json(const json& doc) {
  reject_unknown(doc,
                 {"layout", "n_samples", "planted_chunks", "effect_size", "nuisance", "offsets",
                  "appearance", "noise_std", "yaw_range", "pitch_range", "seed"},
                 "synth spec");
  try {
    SynthSpec spec;
    if (doc.contains("layout")) {
      const auto& l = doc["layout"];
      reject_unknown(l, {"n_layers", "layer_dim", "chunk_size"}, "layout");
      spec.layout = LatentLayout(number<std::size_t>(l.value("n_layers", json(14)), "n_layers"),
                                 number<std::size_t>(l.value("layer_dim", json(512)), "layer_dim"),
                                 number<std::size_t>(l.value("chunk_size", json(16)), "chunk_size"));
      spec.planted_chunks = default_planted_chunks(spec.layout);
    }
    if (doc.contains("n_samples")) spec.n_samples = number<std::size_t>(doc["n_samples"], "n_samples");
    if (doc.contains("planted_chunks"))
      spec.planted_chunks = chunks_from_json(doc["planted_chunks"], spec.layout);
    if (doc.contains("effect_size")) spec.effect_size = number<double>(doc["effect_size"], "effect_size");
    if (doc.contains("noise_std")) spec.noise_std = number<double>(doc["noise_std"], "noise_std");
    if (doc.contains("yaw_range")) spec.yaw_range = range_from_json(doc["yaw_range"], "yaw_range");
    if (doc.contains("pitch_range")) spec.pitch_range = range_from_json(doc["pitch_range"], "pitch_range");
    if (doc.contains("seed")) spec.seed = number<std::uint64_t>(doc["seed"], "seed");
    if (doc.contains("nuisance")) {
      if (!doc["nuisance"].is_array()) fail(ErrorKind::kConfiguration, "nuisance must be an array");
      for (const auto& n : doc["nuisance"]) {
        reject_unknown(n, {"chunks", "train_corr", "test_corr"}, "nuisance descriptor");
        spec.nuisance.push_back({chunks_from_json(n.at("chunks"), spec.layout),
                                 number<double>(n.value("train_corr", json(0.0)), "train_corr"),
                                 number<double>(n.value("test_corr", json(0.0)), "test_corr")});
      }
    }
    if (doc.contains("offsets")) {
      if (!doc["offsets"].is_array()) fail(ErrorKind::kConfiguration, "offsets must be an array");
      for (const auto& o : doc["offsets"]) {
        reject_unknown(o, {"chunks", "shift"}, "offset descriptor");
        spec.offsets.push_back({chunks_from_json(o.at("chunks"), spec.layout),
                                number<double>(o.value("shift", json(0.0)), "shift")});
      }
    }
    if (doc.contains("appearance")) {
      if (!doc["appearance"].is_array()) fail(ErrorKind::kConfiguration, "appearance must be an array");
      for (const auto& a : doc["appearance"]) {
        reject_unknown(a, {"chunks", "scale"}, "appearance descriptor");
        spec.appearance.push_back({chunks_from_json(a.at("chunks"), spec.layout),
                                   number<double>(a.value("scale", json(0.0)), "scale")});
      }
    }
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfiguration, std::string("malformed synth spec: ") + e.what());
  }
}

DomainPairSpec domain_pair_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorKind::kConfiguration, "synth spec must be an object");
  json source_doc = doc;
  source_doc.erase("target");
  DomainPairSpec pair;
  pair.source = synth_spec_from_json(source_doc);
  json target_doc = source_doc;
  if (doc.contains("target")) {
    const auto& t = doc["target"];
    reject_unknown(t,
                   {"n_samples", "seed", "offsets", "nuisance", "appearance", "noise_std",
                    "yaw_range", "pitch_range"},
                   "target overrides");
    for (auto it = t.begin(); it != t.end(); ++it) target_doc[it.key()] = it.value();
  }
  pair.target = synth_spec_from_json(target_doc);
  return pair;
}

ordered_json synth_spec_to_json(const SynthSpec& spec) {
  ordered_json doc;
  doc["layout"] = {{"n_layers", spec.layout.n_layers()},
                   {"layer_dim", spec.layout.layer_dim()},
                   {"chunk_size", spec.layout.chunk_size()}};
  doc["n_samples"] = spec.n_samples;
  doc["planted_chunks"] = spec.planted_chunks;
  doc["effect_size"] = spec.effect_size;
  doc["nuisance"] = ordered_json::array();
  for (const auto& n : spec.nuisance)
    doc["nuisance"].push_back(
        {{"chunks", n.chunks}, {"train_corr", n.train_corr}, {"test_corr", n.test_corr}});
  doc["offsets"] = ordered_json::array();
  for (const auto& o : spec.offsets)
    doc["offsets"].push_back({{"chunks", o.chunks}, {"shift", o.shift}});
  doc["appearance"] = ordered_json::array();
  for (const auto& a : spec.appearance)
    doc["appearance"].push_back({{"chunks", a.chunks}, {"scale", a.scale}});
  doc["noise_std"] = spec.noise_std;
  doc["yaw_range"] = {spec.yaw_range.lo, spec.yaw_range.hi};
  doc["pitch_range"] = {spec.pitch_range.lo, spec.pitch_range.hi};
  doc["seed"] = spec.seed;
  return doc;
}

ordered_json domain_pair_to_json(const DomainPairSpec& pair) {
  ordered_json doc = synth_spec_to_json(pair.source);
  const ordered_json target = synth_spec_to_json(pair.target);
  ordered_json overrides = ordered_json::object();
  for (const char* key :
       {"n_samples", "seed", "offsets", "nuisance", "appearance", "noise_std", "yaw_range",
        "pitch_range"})
    overrides[key] = target[key];
  doc["target"] = std::move(overrides);
  return doc;
}

TrainConfig train_config_from_json(const json& doc) {
  TrainConfig cfg;
  if (doc.is_null()) return cfg;
  reject_unknown(doc, {"learning_rate", "epochs", "batch_size", "seed", "momentum", "hidden"},
                 "train config");
  if (doc.contains("learning_rate")) cfg.learning_rate = number<double>(doc["learning_rate"], "learning_rate");
  if (doc.contains("epochs")) cfg.epochs = number<int>(doc["epochs"], "epochs");
  if (doc.contains("batch_size")) cfg.batch_size = number<std::size_t>(doc["batch_size"], "batch_size");
  if (doc.contains("seed")) cfg.seed = number<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("momentum")) cfg.momentum = number<double>(doc["momentum"], "momentum");
  if (doc.contains("hidden")) cfg.hidden = number<std::size_t>(doc["hidden"], "hidden");
  return cfg;
}

ordered_json train_config_to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
          {"batch_size", c.batch_size},       {"seed", c.seed},
          {"momentum", c.momentum},           {"hidden", c.hidden}};
}

ShiftTrainConfig shift_train_config_from_json(const json& doc, ShiftTrainConfig cfg) {
  if (doc.is_null()) return cfg;
  reject_unknown(doc, {"learning_rate", "epochs", "batch_size", "seed", "momentum", "joint"},
                 "shift train config");
  if (doc.contains("learning_rate")) cfg.learning_rate = number<double>(doc["learning_rate"], "learning_rate");
  if (doc.contains("epochs")) cfg.epochs = number<int>(doc["epochs"], "epochs");
  if (doc.contains("batch_size")) cfg.batch_size = number<std::size_t>(doc["batch_size"], "batch_size");
  if (doc.contains("seed")) cfg.seed = number<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("momentum")) cfg.momentum = number<double>(doc["momentum"], "momentum");
  if (doc.contains("joint")) {
    if (!doc["joint"].is_boolean()) fail(ErrorKind::kConfiguration, "joint must be a boolean");
    cfg.joint = doc["joint"].get<bool>();
  }
  return cfg;
}

LossWeights loss_weights_from_json(const json& doc) {
  LossWeights w;
  if (doc.is_null()) return w;
  reject_unknown(doc, {"l2", "lpips", "sim", "gd"}, "loss weights");
  if (doc.contains("l2")) w.l2 = number<double>(doc["l2"], "l2");
  if (doc.contains("lpips")) w.lpips = number<double>(doc["lpips"], "lpips");
  if (doc.contains("sim")) w.sim = number<double>(doc["sim"], "sim");
  if (doc.contains("gd")) w.gd = number<double>(doc["gd"], "gd");
  validate(w);
  return w;
}

ShiftExperimentConfig shift_experiment_config_from_json(const json& doc) {
  ShiftExperimentConfig cfg;
  if (doc.is_null()) return cfg;
  reject_unknown(doc, {"latent_dim", "seed", "weights", "extractor", "encoder"},
                 "shift experiment config");
  if (doc.contains("latent_dim")) cfg.latent_dim = number<std::size_t>(doc["latent_dim"], "latent_dim");
  if (doc.contains("seed")) cfg.seed = number<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("weights")) cfg.weights = loss_weights_from_json(doc["weights"]);
  if (doc.contains("extractor"))
    cfg.extractor = shift_train_config_from_json(doc["extractor"], cfg.extractor);
  if (doc.contains("encoder"))
    cfg.encoder = shift_train_config_from_json(doc["encoder"], cfg.encoder);
  return cfg;
}

ordered_json shift_experiment_config_to_json(const ShiftExperimentConfig& c) {
  auto train = [](const ShiftTrainConfig& t) {
    return ordered_json{{"learning_rate", t.learning_rate}, {"epochs", t.epochs},
                        {"batch_size", t.batch_size},       {"seed", t.seed},
                        {"momentum", t.momentum},           {"joint", t.joint}};
  };
  return {{"latent_dim", c.latent_dim},
          {"seed", c.seed},
          {"weights",
           {{"l2", c.weights.l2}, {"lpips", c.weights.lpips}, {"sim", c.weights.sim}, {"gd", c.weights.gd}}},
          {"extractor", train(c.extractor)},
          {"encoder", train(c.encoder)}};
}

// ---------------------------------------------------------------------------
// Tensor bundles

std::vector<std::uint8_t> encode_bundle(const TensorBundle& bundle) {
  ByteWriter w;
  w.raw("LGZT", 4);
  w.u32(kFormatVersion);
  w.u32(checked_u32(bundle.size(), "tensor count"));
  for (const auto& [name, m] : bundle) {
    w.u32(checked_u32(name.size(), "tensor name"));
    w.raw(name.data(), name.size());
    w.u32(checked_u32(static_cast<std::size_t>(m.rows()), "rows"));
    w.u32(checked_u32(static_cast<std::size_t>(m.cols()), "cols"));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  }
  return w.take();
}

TensorBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.str(4) != "LGZT") fail(ErrorKind::kFormat, "not a tensor bundle (bad magic)");
  if (r.u32() != kFormatVersion) fail(ErrorKind::kFormat, "unsupported tensor bundle version");
  const std::size_t count = r.u32();
  TensorBundle out;
  for (std::size_t t = 0; t < count; ++t) {
    std::string name = r.str(r.u32());
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    if (rows * cols * 8 > r.remaining()) fail(ErrorKind::kFormat, "tensor '" + name + "' truncated");
    MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
    out.emplace_back(std::move(name), std::move(m));
  }
  if (r.remaining() != 0) fail(ErrorKind::kFormat, "trailing bytes after tensor bundle");
  return out;
}

namespace {

const MatrixXd& find_tensor(const TensorBundle& b, const std::string& name) {
  for (const auto& [n, m] : b)
    if (n == name) return m;
  fail(ErrorKind::kFormat, "tensor bundle is missing '" + name + "'");
}

MatrixXd row_of(std::span<const std::size_t> v) {
  MatrixXd m(1, static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Index>(i)) = static_cast<double>(v[i]);
  return m;
}

std::size_t as_count(double v) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0)
    fail(ErrorKind::kFormat, "tensor bundle holds a non-integral count");
  return static_cast<std::size_t>(v);
}

}  // namespace

TensorBundle to_bundle(const RegressorModel& model) {
  const auto& l = model.mask.layout();
  const std::size_t dims[] = {l.n_layers(), l.layer_dim(), l.chunk_size()};
  return {{"kind.regressor", MatrixXd::Zero(0, 0)},
          {"layout", row_of(dims)},
          {"mask", row_of(model.mask.chunk_indices())},
          {"attention_logits", model.params.attention_logits},
          {"w1", model.params.w1},
          {"b1", model.params.b1},
          {"w2", model.params.w2},
          {"b2", model.params.b2}};
}

RegressorModel regressor_from_bundle(const TensorBundle& bundle) {
  find_tensor(bundle, "kind.regressor");
  const MatrixXd& lay = find_tensor(bundle, "layout");
  if (lay.size() != 3) fail(ErrorKind::kFormat, "layout tensor must hold 3 values");
  LatentLayout layout(as_count(lay(0)), as_count(lay(1)), as_count(lay(2)));
  const MatrixXd& mask = find_tensor(bundle, "mask");
  std::vector<std::size_t> idx;
  for (Index i = 0; i < mask.size(); ++i) idx.push_back(as_count(mask(i)));
  RegressorModel model{RegressorParams{}, SelectionMask(layout, std::move(idx))};
  model.params.attention_logits = find_tensor(bundle, "attention_logits");
  model.params.w1 = find_tensor(bundle, "w1");
  model.params.b1 = find_tensor(bundle, "b1");
  model.params.w2 = find_tensor(bundle, "w2");
  model.params.b2 = find_tensor(bundle, "b2");
  if (model.params.attention_logits.cols() != 1 || model.params.b1.cols() != 1 ||
      model.params.b2.cols() != 1)
    fail(ErrorKind::kFormat, "bias and logit tensors must be column vectors");
  check_shapes(model.params, model.mask);
  return model;
}

TensorBundle to_bundle(const ToyPipelineParams& p) {
  MatrixXd flag(1, 1);
  flag(0, 0) = p.extractor_trained ? 1.0 : 0.0;
  return {{"kind.pipeline", MatrixXd::Zero(0, 0)},
          {"encoder.weight", p.encoder.weight},
          {"encoder.bias", p.encoder.bias},
          {"generator.weight", p.generator().weight},
          {"generator.bias", p.generator().bias},
          {"extractor.weight", p.extractor.weight},
          {"extractor.bias", p.extractor.bias},
          {"extractor_trained", flag}};
}

ToyPipelineParams pipeline_from_bundle(const TensorBundle& bundle) {
  find_tensor(bundle, "kind.pipeline");
  auto vec = [&](const char* name) {
    const MatrixXd& m = find_tensor(bundle, name);
    if (m.cols() != 1) fail(ErrorKind::kFormat, std::string(name) + " must be a column vector");
    return Eigen::VectorXd(m);
  };
  ToyPipelineParams p(AffineMap{find_tensor(bundle, "encoder.weight"), vec("encoder.bias")},
                      AffineMap{find_tensor(bundle, "generator.weight"), vec("generator.bias")},
                      AffineMap{find_tensor(bundle, "extractor.weight"), vec("extractor.bias")});
  const MatrixXd& flag = find_tensor(bundle, "extractor_trained");
  p.extractor_trained = flag.size() == 1 && flag(0, 0) != 0.0;
  return p;
}

}  // namespace gazechunk
