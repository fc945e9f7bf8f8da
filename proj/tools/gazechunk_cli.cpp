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

// gazechunk command-line tool. Exit codes: 0 success, 1 internal error,
// 2 input error, 3 insufficient data, 4 training divergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gazechunk/gazechunk.h"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Carries an exit code out of a command.
struct Exit {
  int code;
  std::string message;
};

void check(gzc_status status) {
  if (status != GZC_OK) throw Exit{static_cast<int>(status), gzc_last_error()};
}

[[noreturn]] void input_error(const std::string& message) { throw Exit{GZC_ERR_INPUT, message}; }

struct DatasetDeleter {
  void operator()(gzc_dataset* p) const { gzc_dataset_free(p); }
};
struct ReportDeleter {
  void operator()(gzc_report* p) const { gzc_report_free(p); }
};
struct ModelDeleter {
  void operator()(gzc_model* p) const { gzc_model_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { gzc_string_free(p); }
};
using Dataset = std::unique_ptr<gzc_dataset, DatasetDeleter>;
using Report = std::unique_ptr<gzc_report, ReportDeleter>;
using Model = std::unique_ptr<gzc_model, ModelDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) input_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) input_error("cannot write " + path);
  out << text;
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    input_error(path + ": " + e.what());
  }
}

// Writes the document to path, or stdout when path is empty.
void emit(const ordered_json& doc, const std::string& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty())
    std::cout << text;
  else
    write_text(path, text);
}

Dataset load(const std::string& latents, const std::string& labels) {
  gzc_dataset* ds = nullptr;
  check(gzc_dataset_load(latents.c_str(), labels.empty() ? nullptr : labels.c_str(), &ds));
  return Dataset(ds);
}

Report load_report(const std::string& path) {
  gzc_report* r = nullptr;
  check(gzc_report_load(path.c_str(), &r));
  return Report(r);
}

std::vector<std::size_t> report_selection(const gzc_report* r) {
  std::size_t count = 0;
  check(gzc_report_selection(r, nullptr, 0, &count));
  std::vector<std::size_t> out(count);
  check(gzc_report_selection(r, out.data(), out.size(), &count));
  return out;
}

std::vector<std::size_t> parse_chunk_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) input_error("bad chunk range '" + item + "'");
        for (auto c = lo; c <= hi; ++c) out.push_back(c);
      }
    } catch (const std::logic_error&) {
      input_error("bad chunk list entry '" + item + "'");
    }
  }
  return out;
}

json parse_range(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) input_error(std::string(what) + " must look like lo:hi");
  try {
    std::size_t used_lo = 0;
    std::size_t used_hi = 0;
    const double lo = std::stod(text.substr(0, colon), &used_lo);
    const double hi = std::stod(text.substr(colon + 1), &used_hi);
    if (used_lo != colon || used_hi != text.size() - colon - 1) throw std::invalid_argument(what);
    return json::array({lo, hi});
  } catch (const std::logic_error&) {
    input_error(std::string(what) + " must look like lo:hi");
  }
}

// Resolves the chunk set of a command from --report, --chunks or --all-chunks.
struct ChunkSource {
  std::string report;
  std::optional<std::string> chunks;
  bool all = false;

  void add_to(CLI::App* cmd, bool allow_all) {
    auto* r = cmd->add_option("--report", report, "Report whose selected chunks form the mask");
    auto* c = cmd->add_option("--chunks", chunks, "Comma separated chunk indices or lo-hi ranges");
    r->excludes(c);
    if (allow_all) {
      auto* a = cmd->add_flag("--all-chunks", all, "Use every chunk");
      a->excludes(r)->excludes(c);
    }
  }

  std::vector<std::size_t> resolve(const gzc_dataset* ds) const {
    if (!report.empty()) return report_selection(load_report(report).get());
    if (chunks) return parse_chunk_list(*chunks);
    if (all) {
      std::size_t layout[4];
      gzc_dataset_layout(ds, layout);
      std::vector<std::size_t> out(layout[3]);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
      return out;
    }
    input_error("one of --report, --chunks or --all-chunks is required");
  }
};

// synth ---------------------------------------------------------------------

struct SynthArgs {
  std::string spec;
  std::string out;
  std::string preset;
  std::optional<std::uint64_t> seed;
  bool pair = false;
};

void run_synth(const SynthArgs& a) {
  json doc;
  if (!a.spec.empty()) {
    doc = read_json(a.spec);
  } else if (!a.preset.empty()) {
    char* text = nullptr;
    check(gzc_synth_preset_pair(a.preset.c_str(), a.seed.value_or(0), &text));
    doc = json::parse(OwnedString(text).get());
  } else {
    doc = json::object();
  }
  if (!doc.is_object()) input_error("spec must be a JSON object");
  if (a.seed) {
    doc["seed"] = *a.seed;
    if (doc.contains("target") && doc["target"].is_object()) doc["target"]["seed"] = *a.seed;
  }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) input_error("cannot create " + a.out + ": " + ec.message());
  const fs::path dir(a.out);

  ordered_json summary{{"tool", "gazechunk"}, {"version", gzc_version()}};
  auto save = [&](const gzc_dataset* ds, const std::string& prefix) {
    const std::string lat = (dir / (prefix + "latents.lgz")).string();
    const std::string lab = (dir / (prefix + "labels.csv")).string();
    check(gzc_dataset_save(ds, lat.c_str(), lab.c_str()));
    summary["files"].push_back(lat);
    summary["files"].push_back(lab);
    summary["n_samples"].push_back(gzc_dataset_size(ds));
  };
  const std::string text = doc.dump();
  if (a.pair || a.preset.size() > 0) {
    gzc_dataset* s = nullptr;
    gzc_dataset* t = nullptr;
    check(gzc_synth_generate_pair(text.c_str(), &s, &t));
    Dataset source(s);
    Dataset target(t);
    save(source.get(), "source_");
    save(target.get(), "target_");
  } else {
    if (doc.contains("target")) input_error("'target' is only valid with --pair");
    gzc_dataset* ds = nullptr;
    check(gzc_synth_generate(text.c_str(), &ds));
    save(Dataset(ds).get(), "");
  }
  summary["seed"] = doc.value("seed", std::uint64_t{0});
  emit(summary, "");
}

// analyze / select ------------------------------------------------------------

struct AnalyzeArgs {
  std::string latents;
  std::string labels;
  std::string config;
  std::string left_range;
  std::string right_range;
  std::optional<std::size_t> top;
  std::optional<double> alpha;
  std::string out;
  std::uint64_t seed = 0;
  bool shuffle = false;
};

ordered_json selection_summary(const gzc_report* r) {
  const auto sel = report_selection(r);
  return {{"n_selected", sel.size()}, {"selected", sel}};
}

void run_analyze(const AnalyzeArgs& a) {
  json config = a.config.empty() ? json::object() : read_json(a.config);
  if (!config.is_object()) input_error("analysis config must be a JSON object");
  if (!a.left_range.empty()) config["left_range"] = parse_range(a.left_range, "--left-range");
  if (!a.right_range.empty()) config["right_range"] = parse_range(a.right_range, "--right-range");
  if (a.top) config["selection"] = {{"mode", "top_n"}, {"count", *a.top}};
  if (a.alpha) config["selection"] = {{"mode", "alpha"}, {"level", *a.alpha}};

  Dataset ds = load(a.latents, a.labels);
  if (a.shuffle) check(gzc_dataset_shuffle_labels(ds.get(), a.seed));
  gzc_report* r = nullptr;
  check(gzc_analyze(ds.get(), config.dump().c_str(), &r));
  Report report(r);
  check(gzc_report_save(report.get(), a.seed, a.out.c_str()));
  emit(selection_summary(report.get()), "");
}

struct SelectArgs {
  std::string report;
  std::optional<std::size_t> top;
  std::optional<double> alpha;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void run_select(const SelectArgs& a) {
  Report report = load_report(a.report);
  const json selection = a.top ? json{{"mode", "top_n"}, {"count", *a.top}}
                               : json{{"mode", "alpha"}, {"level", *a.alpha}};
  check(gzc_report_reselect(report.get(), selection.dump().c_str()));
  const std::uint64_t seed = a.seed ? *a.seed : read_json(a.report).value("seed", std::uint64_t{0});
  check(gzc_report_save(report.get(), seed, a.out.c_str()));
  emit(selection_summary(report.get()), "");
}

// manipulate ------------------------------------------------------------------

struct ManipulateArgs {
  std::string latents;
  std::string labels;
  ChunkSource chunks;
  std::string policy = "code";
  std::string donor_latents;
  std::string donor_labels;
  std::int64_t donor_index = -1;
  std::string donor_group = "left";
  std::string out_latents;
  std::string out_labels;
  std::uint64_t seed = 0;
};

void run_manipulate(const ManipulateArgs& a) {
  Dataset base = load(a.latents, a.labels);
  const auto chunks = a.chunks.resolve(base.get());

  const std::string donor_latents = a.donor_latents.empty() ? a.latents : a.donor_latents;
  const std::string donor_labels = a.donor_latents.empty() ? a.labels : a.donor_labels;
  Dataset donors;
  std::int64_t donor_index = a.donor_index;
  if (a.policy == "code") {
    donors = load(donor_latents, donor_labels);
  } else if (a.policy == "group-mean") {
    if (donor_labels.empty()) input_error("group-mean donors need labels");
    double ranges[4] = {30.0, 90.0, -90.0, -30.0};
    if (!a.chunks.report.empty()) gzc_report_ranges(load_report(a.chunks.report).get(), ranges);
    if (a.donor_group != "left" && a.donor_group != "right")
      input_error("--donor-group must be left or right");
    const bool left = a.donor_group == "left";
    Dataset pool = load(donor_latents, donor_labels);
    gzc_dataset* mean = nullptr;
    check(gzc_dataset_group_mean(pool.get(), left ? ranges[0] : ranges[2],
                                 left ? ranges[1] : ranges[3], &mean));
    donors.reset(mean);
    donor_index = 0;
  } else {
    input_error("--donor-policy must be code or group-mean");
  }

  gzc_dataset* edited = nullptr;
  check(gzc_manipulate(base.get(), donors.get(), donor_index, chunks.data(), chunks.size(), &edited));
  Dataset result(edited);
  check(gzc_dataset_save(result.get(), a.out_latents.c_str(),
                         a.out_labels.empty() ? nullptr : a.out_labels.c_str()));
  emit({{"n_samples", gzc_dataset_size(result.get())},
        {"n_chunks_replaced", chunks.size()},
        {"donor_policy", a.policy},
        {"seed", a.seed}},
       "");
}

// train / eval ----------------------------------------------------------------

struct TrainArgs {
  std::string latents;
  std::string labels;
  ChunkSource chunks;
  std::string config;
  std::optional<double> lr;
  std::optional<int> epochs;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> hidden;
  std::optional<double> momentum;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string log;
};

void run_train(const TrainArgs& a) {
  json config = a.config.empty() ? json::object() : read_json(a.config);
  if (!config.is_object()) input_error("train config must be a JSON object");
  if (a.lr) config["learning_rate"] = *a.lr;
  if (a.epochs) config["epochs"] = *a.epochs;
  if (a.batch) config["batch_size"] = *a.batch;
  if (a.hidden) config["hidden"] = *a.hidden;
  if (a.momentum) config["momentum"] = *a.momentum;
  if (a.seed) config["seed"] = *a.seed;

  Dataset ds = load(a.latents, a.labels);
  const auto chunks = a.chunks.resolve(ds.get());
  gzc_model* m = nullptr;
  char* log = nullptr;
  check(gzc_model_train(ds.get(), chunks.data(), chunks.size(), config.dump().c_str(), &m, &log));
  Model model(m);
  OwnedString log_text(log);
  check(gzc_model_save(model.get(), a.out.c_str()));
  ordered_json doc = ordered_json::parse(log_text.get());
  doc["n_chunks"] = chunks.size();
  doc["model"] = a.out;
  emit(doc, a.log);
}

struct EvalArgs {
  std::string model;
  std::string latents;
  std::string labels;
  std::string out;
  std::uint64_t seed = 0;
};

void run_eval(const EvalArgs& a) {
  gzc_model* m = nullptr;
  check(gzc_model_load(a.model.c_str(), &m));
  Model model(m);
  Dataset ds = load(a.latents, a.labels);
  double error = 0.0;
  check(gzc_model_evaluate(model.get(), ds.get(), &error));
  emit({{"n_samples", gzc_dataset_size(ds.get())}, {"mean_angular_error_deg", error}}, a.out);
}

// shiftsim --------------------------------------------------------------------

struct ShiftArgs {
  std::string data;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda_gd;
  bool joint = false;
  std::string out;
  std::string save_pipeline;
  bool grad_check = false;
  std::size_t configs = 100;
};

void run_shiftsim(const ShiftArgs& a) {
  if (a.grad_check) {
    double worst = 0.0;
    check(gzc_shiftsim_grad_check(a.seed.value_or(0), a.configs, &worst));
    emit({{"configs", a.configs}, {"max_relative_error", worst}, {"passed", worst < 1e-4}}, a.out);
    if (!(worst < 1e-4)) throw Exit{GZC_ERR_INTERNAL, "gradient check failed"};
    return;
  }
  json config = a.config.empty() ? json::object() : read_json(a.config);
  if (!config.is_object()) input_error("shiftsim config must be a JSON object");
  if (a.seed) {
    config["seed"] = *a.seed;
    for (const char* phase : {"extractor", "encoder"}) config[phase]["seed"] = *a.seed;
  }
  if (a.lambda_gd) config["weights"]["gd"] = *a.lambda_gd;
  if (a.joint) config["encoder"]["joint"] = true;
  std::string data_text;
  if (!a.data.empty()) {
    json data = read_json(a.data);
    if (a.seed && data.is_object()) {
      data["seed"] = *a.seed;
      if (data.contains("target") && data["target"].is_object()) data["target"]["seed"] = *a.seed;
    }
    data_text = data.dump();
  }
  char* result = nullptr;
  check(gzc_shiftsim_run(data_text.empty() ? nullptr : data_text.c_str(), config.dump().c_str(),
                         a.save_pipeline.empty() ? nullptr : a.save_pipeline.c_str(), &result));
  OwnedString text(result);
  emit(ordered_json::parse(text.get()), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gazechunk: chunk-level latent analysis for gaze"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gzc_version()));

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic latent dataset");
  c_synth->add_option("--spec", synth.spec, "Synth spec JSON")->check(CLI::ExistingFile);
  c_synth->add_option("--preset", synth.preset, "Domain pair preset: ablation or toy")
      ->check(CLI::IsMember({"ablation", "toy"}));
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--seed", synth.seed, "Overrides the spec's seed");
  c_synth->add_flag("--pair", synth.pair, "Write a source/target domain pair");

  AnalyzeArgs analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Rank chunks by group contrast");
  c_analyze->add_option("--latents", analyze.latents)->required();
  c_analyze->add_option("--labels", analyze.labels)->required();
  c_analyze->add_option("--config", analyze.config, "Analysis config JSON");
  c_analyze->add_option("--left-range", analyze.left_range, "Left group yaw range lo:hi");
  c_analyze->add_option("--right-range", analyze.right_range, "Right group yaw range lo:hi");
  auto* top = c_analyze->add_option("--top", analyze.top, "Select the N highest |t| chunks");
  c_analyze->add_option("--alpha", analyze.alpha, "Select chunks with p < alpha")->excludes(top);
  c_analyze->add_option("--out", analyze.out, "Report path")->required();
  c_analyze->add_option("--seed", analyze.seed, "Recorded in the report; seeds --shuffle-labels");
  c_analyze->add_flag("--shuffle-labels", analyze.shuffle, "Permute labels before analysis");

  SelectArgs select;
  auto* c_select = app.add_subcommand("select", "Change the selection of an existing report");
  c_select->add_option("--report", select.report)->required()->check(CLI::ExistingFile);
  auto* s_top = c_select->add_option("--top", select.top);
  auto* s_alpha = c_select->add_option("--alpha", select.alpha);
  s_top->excludes(s_alpha);
  c_select->add_option("--out", select.out)->required();
  c_select->add_option("--seed", select.seed);

  ManipulateArgs manip;
  auto* c_manip = app.add_subcommand("manipulate", "Replace chunks of latent codes");
  c_manip->add_option("--latents", manip.latents)->required();
  c_manip->add_option("--labels", manip.labels);
  manip.chunks.add_to(c_manip, false);
  c_manip->add_option("--donor-policy", manip.policy, "code or group-mean");
  c_manip->add_option("--donor-latents", manip.donor_latents, "Donor latents (default: input)");
  c_manip->add_option("--donor-labels", manip.donor_labels);
  c_manip->add_option("--donor-index", manip.donor_index,
                      "Donor row for every sample; -1 pairs rows (default)");
  c_manip->add_option("--donor-group", manip.donor_group, "left or right (group-mean)");
  c_manip->add_option("--out-latents", manip.out_latents)->required();
  c_manip->add_option("--out-labels", manip.out_labels);
  c_manip->add_option("--seed", manip.seed);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the gated gaze regressor");
  c_train->add_option("--latents", tr.latents)->required();
  c_train->add_option("--labels", tr.labels)->required();
  tr.chunks.add_to(c_train, true);
  c_train->add_option("--config", tr.config, "Train config JSON");
  c_train->add_option("--lr", tr.lr);
  c_train->add_option("--epochs", tr.epochs);
  c_train->add_option("--batch-size", tr.batch);
  c_train->add_option("--hidden", tr.hidden);
  c_train->add_option("--momentum", tr.momentum);
  c_train->add_option("--seed", tr.seed);
  c_train->add_option("--out", tr.out, "Model path")->required();
  c_train->add_option("--log", tr.log, "Loss curve JSON (default: stdout)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Mean angular error of a trained model");
  c_eval->add_option("--model", ev.model)->required();
  c_eval->add_option("--latents", ev.latents)->required();
  c_eval->add_option("--labels", ev.labels)->required();
  c_eval->add_option("--out", ev.out);
  c_eval->add_option("--seed", ev.seed);

  ShiftArgs sh;
  auto* c_shift = app.add_subcommand("shiftsim", "Toy gaze-preserving domain shift");
  c_shift->add_option("--data", sh.data, "Domain pair spec JSON (default: toy preset)");
  c_shift->add_option("--config", sh.config, "Shift experiment config JSON");
  c_shift->add_option("--seed", sh.seed);
  c_shift->add_option("--lambda-gd", sh.lambda_gd);
  c_shift->add_flag("--joint", sh.joint, "Also update the extractor in phase two");
  c_shift->add_option("--out", sh.out);
  c_shift->add_option("--save-pipeline", sh.save_pipeline);
  c_shift->add_flag("--grad-check", sh.grad_check, "Check analytic gradients and exit");
  c_shift->add_option("--configs", sh.configs, "Random configurations for --grad-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return GZC_ERR_INPUT;
  }

  try {
    if (c_synth->parsed()) run_synth(synth);
    if (c_analyze->parsed()) run_analyze(analyze);
    if (c_select->parsed()) {
      if (!select.top && !select.alpha) input_error("select needs --top or --alpha");
      run_select(select);
    }
    if (c_manip->parsed()) run_manipulate(manip);
    if (c_train->parsed()) run_train(tr);
    if (c_eval->parsed()) run_eval(ev);
    if (c_shift->parsed()) run_shiftsim(sh);
  } catch (const Exit& e) {
    std::cerr << "gazechunk: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "gazechunk: " << e.what() << "\n";
    return GZC_ERR_INTERNAL;
  }
  return 0;
}
