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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. `acceptance 4 9` runs a subset.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gazechunk/core.hpp"
#include "gazechunk/formats.hpp"
#include "gazechunk/manipulate.hpp"
#include "gazechunk/regressor.hpp"
#include "gazechunk/shiftsim.hpp"
#include "gazechunk/statedit.hpp"
#include "gazechunk/synth.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace gazechunk;

namespace {

// Tolerances and thresholds of the acceptance criteria.
constexpr double kAc1TRelTol = 1e-10;
constexpr double kAc1PAbsTol = 1e-6;
constexpr double kAc1Seconds = 5.0;
constexpr double kAc2Recall = 0.95;
constexpr double kAc2Precision = 0.90;
constexpr double kAc2Seconds = 10.0;
constexpr double kAc3Lo = 0.03;
constexpr double kAc3Hi = 0.07;
constexpr double kAc4RelGain = 0.20;
constexpr double kAc4Seconds = 60.0;
constexpr double kAc6RelErr = 1e-4;
constexpr double kAc6Seconds = 10.0;
constexpr double kAc7Tol = 1e-9;
constexpr double kAc9Fraction = 0.90;

// Protocol settings.
constexpr std::size_t kTopN = 64;
const TrainConfig kAblationTrain{0.01, 30, 64, 0, 0.9, 32};
const TrainConfig kTransportTrain{0.01, 30, 64, 0, 0.9, 32};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

// AC1 -------------------------------------------------------------------------

Outcome ac1() {
  const auto t0 = Clock::now();
  std::mt19937_64 engine(20260101);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  std::uniform_real_distribution<double> loc(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(0.05, 3.0);
  const LatentLayout layout(1, 4, 4);  // a single chunk of 4 elements
  double worst_t = 0.0;
  double worst_p = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t nl = size(engine);
    const std::size_t nr = size(engine);
    std::normal_distribution<double> left(loc(engine), scale(engine));
    std::normal_distribution<double> right(loc(engine), scale(engine));
    LatentDataset ds(layout);
    std::vector<double> ml;
    std::vector<double> mr;
    for (std::size_t i = 0; i < nl + nr; ++i) {
      const bool is_left = i < nl;
      std::vector<double> code(4);
      for (double& v : code) v = is_left ? left(engine) : right(engine);
      (is_left ? ml : mr).push_back(oracle::chunk_means_naive(layout, code)[0]);
      ds.add("s" + std::to_string(i), code, GazeLabel{is_left ? 60.0 : -60.0, 0.0});
    }
    const AnalysisReport r = analyze(ds, AnalysisConfig{{30, 90}, {-90, -30}, SelectionMode::top_n(1)});
    const double t_ref = oracle::welch_t(ml, mr);
    const double rel = std::abs(r.t_stat[0] - t_ref) / std::max(std::abs(t_ref), 1e-300);
    worst_t = std::max(worst_t, rel);
    worst_p = std::max(worst_p, std::abs(r.p_value[0] - oracle::simpson_two_sided_p(r.t_stat[0])));
  }
  const double secs = seconds_since(t0);
  return {worst_t <= kAc1TRelTol && worst_p <= kAc1PAbsTol && secs < kAc1Seconds,
          "max t rel err " + fmt(worst_t) + " (<= 1e-10), max p abs err " + fmt(worst_p) +
              " (<= 1e-6), " + fmt(secs, 3) + " s (< 5 s)"};
}

// AC2 / AC3 -------------------------------------------------------------------

Outcome ac2() {
  bool pass = true;
  double min_recall = 1.0;
  double min_precision = 1.0;
  double max_secs = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t0 = Clock::now();
    SynthSpec spec;
    spec.seed = seed;
    const LatentDataset ds = generate(spec);
    AnalysisConfig cfg;
    cfg.selection = SelectionMode::top_n(kTopN);
    const AnalysisReport r = analyze(ds, cfg);
    const OracleScore s = oracle_report(spec, r.selection());
    const double secs = seconds_since(t0);
    min_recall = std::min(min_recall, s.recall);
    min_precision = std::min(min_precision, s.precision);
    max_secs = std::max(max_secs, secs);
    pass = pass && s.recall >= kAc2Recall && s.precision >= kAc2Precision && secs < kAc2Seconds;
  }
  return {pass, "seeds 0..9: min recall " + fmt(min_recall) + " (>= 0.95), min precision " +
                    fmt(min_precision) + " (>= 0.90), max " + fmt(max_secs, 3) + " s/seed (< 10 s)"};
}

Outcome ac3() {
  double total = 0.0;
  std::string rates;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    LatentDataset ds = generate(spec);
    std::vector<GazeLabel> labels(ds.labels().begin(), ds.labels().end());
    std::mt19937_64 engine(seed);
    std::shuffle(labels.begin(), labels.end(), engine);
    ds.set_labels(std::move(labels));
    AnalysisConfig cfg;
    cfg.selection = SelectionMode::alpha_level(0.05);
    const AnalysisReport r = analyze(ds, cfg);
    const double rate = static_cast<double>(r.selection().size()) / static_cast<double>(r.n_chunks());
    total += rate;
    rates += (rates.empty() ? "" : " ") + fmt(rate, 3);
  }
  const double mean = total / 10.0;
  return {mean >= kAc3Lo && mean <= kAc3Hi,
          "mean selection rate " + fmt(mean) + " in [0.03, 0.07] (per seed: " + rates + ")"};
}

// AC4 -------------------------------------------------------------------------

Outcome ac4() {
  bool pass = true;
  std::string per_seed;
  double max_secs = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto t0 = Clock::now();
    const auto [source, target] = generate_domain_pair(default_domain_pair(seed));
    AnalysisConfig cfg;
    cfg.selection = SelectionMode::top_n(kTopN);
    const SelectionMask top = analyze(source, cfg).selection();
    const SelectionMask all = SelectionMask::all(source.layout());
    TrainConfig tc = kAblationTrain;
    tc.seed = seed;
    const double err_top = evaluate(train(source, top, tc).params, target, top);
    const double err_all = evaluate(train(source, all, tc).params, target, all);
    const double secs = seconds_since(t0);
    max_secs = std::max(max_secs, secs);
    const bool ok = err_top <= (1.0 - kAc4RelGain) * err_all && secs < kAc4Seconds;
    pass = pass && ok;
    per_seed += " s" + std::to_string(seed) + " " + fmt(err_top, 3) + "/" + fmt(err_all, 3) + "deg";
  }
  return {pass, "top-64 vs all-448 target error, top <= 0.8*all:" + per_seed + "; max " +
                    fmt(max_secs, 3) + " s/seed (< 60 s)"};
}

// AC5 / AC10 ------------------------------------------------------------------

struct ShiftRuns {
  std::vector<double> gd_with;
  std::vector<double> gd_without;
  std::vector<double> gap_raw;
  std::vector<double> gap_shifted;
};

const ShiftRuns& shift_runs() {
  static std::optional<ShiftRuns> runs;
  if (runs) return *runs;
  runs.emplace();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [s, t] = generate_domain_pair(toy_domain_pair(seed));
    const DomainPair data{to_domain_data(s), to_domain_data(t)};
    ShiftExperimentConfig cfg;
    cfg.seed = seed;
    cfg.extractor.seed = seed;
    cfg.encoder.seed = seed;
    cfg.weights.gd = 1.0;
    const ShiftExperimentResult with = run_shift_experiment(data, cfg);
    cfg.weights.gd = 0.0;
    const ShiftExperimentResult without = run_shift_experiment(data, cfg);
    runs->gd_with.push_back(with.heldout_gaze_distortion);
    runs->gd_without.push_back(without.heldout_gaze_distortion);
    runs->gap_raw.push_back(with.gap_raw);
    runs->gap_shifted.push_back(with.gap_shifted);
  }
  return *runs;
}

Outcome ac5() {
  const ShiftRuns& r = shift_runs();
  int wins = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < r.gd_with.size(); ++i) {
    wins += r.gd_with[i] < r.gd_without[i] ? 1 : 0;
    per_seed += " s" + std::to_string(i) + " " + fmt(r.gd_with[i], 6) + "/" + fmt(r.gd_without[i], 6) +
                " (d=" + fmt(r.gd_without[i] - r.gd_with[i], 2) + ")";
  }
  return {wins == 5, "held-out L_GD with/without gaze term, " + std::to_string(wins) +
                         "/5 strictly lower:" + per_seed};
}

Outcome ac10() {
  const ShiftRuns& r = shift_runs();
  int wins = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < r.gap_raw.size(); ++i) {
    wins += r.gap_shifted[i] < r.gap_raw[i] ? 1 : 0;
    per_seed += " s" + std::to_string(i) + " " + fmt(r.gap_shifted[i], 3) + "/" + fmt(r.gap_raw[i], 3);
  }
  return {wins == 5, "domain gap shifted/raw targets, " + std::to_string(wins) + "/5 reduced:" + per_seed};
}

// AC6 -------------------------------------------------------------------------

Outcome ac6() {
  const auto t0 = Clock::now();
  std::mt19937_64 engine(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_reg = 0.0;
  int checked = 0;
  int resampled = 0;
  while (checked < 100) {
    const std::size_t cs = 1 + engine() % 4;
    const LatentLayout layout(1 + engine() % 3, cs * (1 + engine() % 3), cs);
    const std::size_t k = layout.n_chunks();
    std::vector<std::size_t> chunks;
    for (std::size_t c = 0; c < k; ++c)
      if (engine() % 2 == 0) chunks.push_back(c);
    if (chunks.empty()) chunks.push_back(engine() % k);
    const SelectionMask mask(layout, chunks);
    const std::size_t hidden = 1 + engine() % 6;
    RegressorParams p = RegressorParams::zeros(k, mask.size() * cs, hidden);
    p.for_each([&](double& v) { v = 0.7 * normal(engine); });
    LatentDataset ds(layout);
    const std::size_t n = 1 + engine() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> code(layout.total_dims());
      for (double& v : code) v = normal(engine);
      ds.add(std::to_string(i), code, GazeLabel{-90.0 + 180.0 * unit(engine), -30.0 + 60.0 * unit(engine)});
    }
    const auto rows = iota(n);
    if (oracle::min_relu_margin(p, ds, rows, mask) < 1e-3) {
      ++resampled;
      continue;
    }
    worst_reg = std::max(worst_reg, oracle::regressor_grad_check(p, ds, rows, mask));
    ++checked;
  }
  const double worst_shift = random_grad_check(6, 100);
  const double secs = seconds_since(t0);
  return {worst_reg < kAc6RelErr && worst_shift < kAc6RelErr && secs < kAc6Seconds,
          "max rel err regressor " + fmt(worst_reg) + ", shiftsim " + fmt(worst_shift) +
              " (< 1e-4) over 100 configs each (" + std::to_string(resampled) +
              " regressor draws on a ReLU kink redrawn), " + fmt(secs, 3) + " s (< 10 s)"};
}

// AC7 -------------------------------------------------------------------------

Outcome ac7() {
  double worst_exact = 0.0;
  auto exact = [&](const Vec3& a, const Vec3& b, double expected) {
    worst_exact = std::max(worst_exact, std::abs(angular_error(a, b) - expected));
  };
  std::mt19937_64 engine(7);
  std::uniform_real_distribution<double> yaw(-180.0, 180.0);
  std::uniform_real_distribution<double> pitch(-89.0, 89.0);
  std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const GazeLabel g{yaw(engine), pitch(engine)};
    const Vec3 v = gaze_to_vector(g);
    exact(v, v, 0.0);
    exact(v, {-v[0], -v[1], -v[2]}, 180.0);
    // A vector orthogonal to v: v x e for a basis vector e not parallel to v.
    const Vec3 e = std::abs(v[0]) < 0.5 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 o{v[1] * e[2] - v[2] * e[1], v[2] * e[0] - v[0] * e[2], v[0] * e[1] - v[1] * e[0]};
    exact(v, o, 90.0);
  }
  exact(gaze_to_vector({0, 0}), gaze_to_vector({90, 0}), 90.0);
  exact(gaze_to_vector({0, 0}), gaze_to_vector({0, 90}), 90.0);
  exact(gaze_to_vector({0, 0}), gaze_to_vector({180, 0}), 180.0);
  exact(gaze_to_vector({30, 20}), gaze_to_vector({-150, -20}), 180.0);
  exact(gaze_to_vector({45, 10}), gaze_to_vector({45, 10}), 0.0);

  double worst_scale = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = gaze_to_vector({yaw(engine), pitch(engine)});
    const Vec3 b = gaze_to_vector({yaw(engine), pitch(engine)});
    const double sa = std::pow(10.0, log_scale(engine));
    const double sb = std::pow(10.0, log_scale(engine));
    const double base = angular_error(a, b);
    const double scaled = angular_error({sa * a[0], sa * a[1], sa * a[2]}, {sb * b[0], sb * b[1], sb * b[2]});
    worst_scale = std::max(worst_scale, std::abs(base - scaled));
  }
  return {worst_exact <= kAc7Tol && worst_scale <= kAc7Tol,
          "max error at 0/90/180 deg cases " + fmt(worst_exact) + " (<= 1e-9), max scaling drift " +
              fmt(worst_scale) + " deg over 1000 cases (<= 1e-9)"};
}

// AC8 -------------------------------------------------------------------------

Outcome ac8() {
  std::mt19937_64 engine(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  int idem = 0;
  int part = 0;
  int local = 0;
  int empty = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t cs = 1 + engine() % 16;
    const LatentLayout layout(1 + engine() % 4, cs * (1 + engine() % 8), cs);
    std::vector<double> bv(layout.total_dims());
    std::vector<double> dv(layout.total_dims());
    for (double& v : bv) v = normal(engine);
    for (double& v : dv) v = normal(engine);
    const LatentCode base(layout, bv);
    const LatentCode donor(layout, dv);
    std::vector<std::size_t> chunks;
    for (std::size_t c = 0; c < layout.n_chunks(); ++c)
      if (engine() % 3 == 0) chunks.push_back(c);
    const SelectionMask mask(layout, chunks);
    const LatentCode once = replace_chunks(base, donor, mask);
    idem += replace_chunks(once, donor, mask) == once ? 1 : 0;
    part += once == replace_chunks(donor, base, mask.complement()) ? 1 : 0;
    bool ok = true;
    for (std::size_t i = 0; i < layout.total_dims(); ++i) {
      const bool masked = mask.contains(i / cs);
      const double want = masked ? donor[i] : base[i];
      const double got = once[i];
      ok = ok && std::memcmp(&got, &want, sizeof(double)) == 0;
    }
    local += ok ? 1 : 0;
    const LatentCode same = replace_chunks(base, donor, SelectionMask(layout));
    empty += std::memcmp(same.values().data(), base.values().data(),
                         sizeof(double) * layout.total_dims()) == 0
                 ? 1
                 : 0;
  }
  return {idem == 1000 && part == 1000 && local == 1000 && empty == 1000,
          "idempotence " + std::to_string(idem) + "/1000, partition " + std::to_string(part) +
              "/1000, locality " + std::to_string(local) + "/1000, empty mask bit-identical " +
              std::to_string(empty) + "/1000"};
}

// AC9 -------------------------------------------------------------------------

Outcome ac9() {
  SynthSpec train_spec;
  train_spec.seed = 0;
  const LatentDataset train_ds = generate(train_spec);
  AnalysisConfig cfg;
  cfg.selection = SelectionMode::top_n(kTopN);
  const AnalysisReport report = analyze(train_ds, cfg);
  const SelectionMask mask = report.selection();
  const RegressorParams params = train(train_ds, mask, kTransportTrain).params;

  SynthSpec test_spec = train_spec;
  test_spec.seed = 1;
  const LatentDataset test_ds = generate(test_spec);
  const GroupSplit split = split_groups(test_ds, cfg.left_range, cfg.right_range);
  std::mt19937_64 engine(9);
  int hits = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t r = split.right[engine() % split.right.size()];
    const std::size_t l = split.left[engine() % split.left.size()];
    const LatentCode edited = replace_chunks(test_ds.code_copy(r), test_ds.code_copy(l), mask);
    const double yaw = rad_to_deg(forward(params, edited, mask).yaw_rad);
    hits += cfg.left_range.contains(yaw) ? 1 : 0;
  }
  const double frac = hits / 500.0;
  return {frac >= kAc9Fraction, "swapped right-group samples predicted in left range: " +
                                    std::to_string(hits) + "/500 = " + fmt(frac) + " (>= 0.90)"};
}

// AC11 ------------------------------------------------------------------------

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gazechunk_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

int run_capture(const std::string& cmd, const fs::path& out) {
  const int rc = std::system((cmd + " > '" + out.string() + "' 2>/dev/null").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome ac11() {
  const std::string cli = GAZECHUNK_CLI;
  const std::string schema = std::string(GAZECHUNK_SOURCE_DIR) + "/schemas/report.schema.json";
  const std::string validator =
      std::string(GAZECHUNK_SOURCE_DIR) + "/tests/support/validate_schema.py";
  TempDir tmp;
  std::vector<std::string> problems;

  // Small spec so that every command runs quickly.
  const fs::path spec = tmp.path / "spec.json";
  write_text(spec, R"({"layout": {"n_layers": 6, "layer_dim": 64, "chunk_size": 16},
                       "planted_chunks": {"layers": [4, 5]}, "n_samples": 900})");
  const fs::path shift_cfg = tmp.path / "shift.json";
  write_text(shift_cfg, R"({"extractor": {"epochs": 5}, "encoder": {"epochs": 5}})");

  std::vector<std::string> reports;
  std::vector<std::pair<std::string, std::vector<fs::path>>> runs_per_pass[2];
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path d = tmp.path / ("run" + std::to_string(pass));
    fs::create_directories(d);
    const std::string D = "'" + d.string() + "'";
    auto step = [&](const std::string& name, const std::string& args, std::vector<fs::path> outputs,
                    int expect = 0) {
      const fs::path stdout_file = d / (name + ".stdout");
      const int rc = run_capture("'" + cli + "' " + args, stdout_file);
      if (rc != expect)
        problems.push_back(name + " exited " + std::to_string(rc) + " (expected " + std::to_string(expect) + ")");
      outputs.push_back(stdout_file);
      runs_per_pass[pass].emplace_back(name, std::move(outputs));
    };
    step("synth", "synth --spec '" + spec.string() + "' --seed 3 --out " + D,
         {d / "latents.lgz", d / "labels.csv"});
    step("synth_pair", "synth --preset toy --seed 3 --out " + D + "/pair",
         {d / "pair/source_latents.lgz", d / "pair/target_labels.csv"});
    step("analyze", "analyze --latents " + D + "/latents.lgz --labels " + D +
                        "/labels.csv --top 16 --seed 3 --out " + D + "/report.json",
         {d / "report.json"});
    step("analyze_all", "analyze --latents " + D + "/latents.lgz --labels " + D +
                            "/labels.csv --top 24 --out " + D + "/report_all.json",
         {d / "report_all.json"});
    step("analyze_null", "analyze --latents " + D + "/latents.lgz --labels " + D +
                             "/labels.csv --alpha 0.05 --shuffle-labels --seed 3 --out " + D +
                             "/report_null.json",
         {d / "report_null.json"});
    step("select", "select --report " + D + "/report.json --alpha 0.01 --out " + D + "/report_sel.json",
         {d / "report_sel.json"});
    step("manipulate", "manipulate --latents " + D + "/latents.lgz --labels " + D +
                           "/labels.csv --report " + D + "/report.json --donor-policy group-mean " +
                           "--donor-group left --out-latents " + D + "/edited.lgz",
         {d / "edited.lgz"});
    step("manipulate_empty", "manipulate --latents " + D + "/latents.lgz --chunks '' --donor-index 0 " +
                                 "--out-latents " + D + "/same.lgz",
         {d / "same.lgz"});
    step("train", "train --latents " + D + "/latents.lgz --labels " + D + "/labels.csv --report " + D +
                      "/report.json --epochs 5 --hidden 16 --seed 3 --out " + D + "/model.lgzt",
         {d / "model.lgzt"});
    step("eval", "eval --model " + D + "/model.lgzt --latents " + D + "/latents.lgz --labels " + D +
                     "/labels.csv",
         {});
    step("shiftsim", "shiftsim --config '" + shift_cfg.string() + "' --seed 3 --save-pipeline " + D +
                         "/pipeline.lgzt",
         {d / "pipeline.lgzt"});
    step("grad_check", "shiftsim --grad-check --configs 20 --seed 3", {});
    step("bad_spec", "synth --spec '" + shift_cfg.string() + "' --out " + D + "/bad", {}, 2);
    if (pass == 0)
      for (const char* r : {"report.json", "report_all.json", "report_null.json", "report_sel.json"})
        reports.push_back((d / r).string());
  }

  // Bit reproducibility across the two passes.
  std::size_t compared = 0;
  for (std::size_t i = 0; i < runs_per_pass[0].size(); ++i) {
    const auto& [name, files] = runs_per_pass[0][i];
    const auto& other = runs_per_pass[1][i].second;
    for (std::size_t f = 0; f < files.size(); ++f) {
      std::string a;
      std::string b;
      try {
        a = read_text(files[f]);
        b = read_text(other[f]);
      } catch (const Error& e) {
        problems.push_back(name + ": " + e.what());
        continue;
      }
      // Summaries on stdout name their output paths; compare the rest.
      if (files[f].extension() == ".stdout") {
        const std::string d0 = (tmp.path / "run0").string();
        const std::string d1 = (tmp.path / "run1").string();
        for (std::size_t at; (at = b.find(d1)) != std::string::npos;) b.replace(at, d1.size(), d0);
      }
      ++compared;
      if (a != b) problems.push_back(name + ": " + files[f].filename().string() + " differs between runs");
    }
  }
  if (read_text(tmp.path / "run0/same.lgz") != read_text(tmp.path / "run0/latents.lgz"))
    problems.push_back("empty-mask manipulate output differs from its input");

  // LatentFile round trip: file -> values -> file, and random float32 payloads.
  const auto bytes = read_file(tmp.path / "run0/latents.lgz");
  const DecodedLatents dec = decode_latents(bytes);
  if (encode_latents(dec.layout, dec.n_samples, dec.values) != bytes)
    problems.push_back("latent file round trip is not byte-exact");
  std::mt19937_64 engine(11);
  const LatentLayout small(2, 32, 16);
  int round_trips = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(3 * small.total_dims());
    for (double& v : values) {
      float f;
      do {
        const auto bits = static_cast<std::uint32_t>(engine());
        std::memcpy(&f, &bits, sizeof f);
      } while (!std::isfinite(f));
      v = f;
    }
    const DecodedLatents back = decode_latents(encode_latents(small, 3, values));
    round_trips += std::memcmp(back.values.data(), values.data(), values.size() * sizeof(double)) == 0;
  }
  if (round_trips != 200) problems.push_back("random float32 payload round trip failed");

  // Schema validity.
  std::string cmd = "python3 '" + validator + "' '" + schema + "'";
  for (const auto& r : reports) cmd += " '" + r + "'";
  if (run(cmd) != 0) problems.push_back("a report failed schema validation");

  std::string detail = std::to_string(compared) + " outputs identical across two seeded runs, " +
                       "latent round trip byte-exact (file + 200 random payloads), " +
                       std::to_string(reports.size()) + " reports schema-valid";
  if (!problems.empty()) {
    detail = "";
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
  }
  return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::pair<std::string, std::function<Outcome()>>>> criteria = {
      {1, {"statistic correctness", ac1}},
      {2, {"planted-chunk recovery", ac2}},
      {3, {"null calibration", ac3}},
      {4, {"chunk-selection ablation direction", ac4}},
      {5, {"gaze-distortion loss direction", ac5}},
      {6, {"gradient exactness", ac6}},
      {7, {"metric identities", ac7}},
      {8, {"manipulation algebra", ac8}},
      {9, {"label transport", ac9}},
      {10, {"domain-gap proxy", ac10}},
      {11, {"reproducibility and formats", ac11}},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& [id, entry] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "AC" << id << " " << (o.pass ? "PASS" : "FAIL") << " " << entry.first << ": "
              << o.detail << " [" << fmt(seconds_since(t0), 3) << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
