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


#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <json.hpp>

#include "gazechunk/formats.hpp"

namespace gazechunk {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  const std::string cmd = std::string("'") + GAZECHUNK_CLI + "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("gazechunk_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return "'" + (dir_ / name).string() + "'"; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void small_synth(const std::string& sub) {
    write_text(path("spec.json"),
               R"({"layout": {"n_layers": 8, "layer_dim": 64, "chunk_size": 16}, "n_samples": 600})");
    ASSERT_EQ(cli("synth --spec " + at("spec.json") + " --out " + at(sub)).code, 0);
  }

  fs::path dir_;
};

TEST_F(Cli, SynthDefaultHeaderAndDeterminism) {
  ASSERT_EQ(cli("synth --out " + at("a") + " --seed 1").code, 0);
  const auto bytes = read_file(path("a/latents.lgz"));
  const DecodedLatents d = decode_latents(bytes);
  EXPECT_EQ(d.layout, LatentLayout(14, 512, 16));
  ASSERT_EQ(cli("synth --out " + at("b") + " --seed 1").code, 0);
  EXPECT_EQ(read_file(path("b/latents.lgz")), bytes);
  EXPECT_EQ(read_text(path("b/labels.csv")), read_text(path("a/labels.csv")));
}

TEST_F(Cli, AnalyzeTopAllAndSchema) {
  small_synth("d");
  const std::string data = " --latents " + at("d/latents.lgz") + " --labels " + at("d/labels.csv");
  ASSERT_EQ(cli("analyze" + data + " --top 8 --out " + at("r.json")).code, 0);
  const AnalysisReport r = load_report(path("r.json"));
  SynthSpec spec;
  spec.layout = LatentLayout(8, 64, 16);
  spec.planted_chunks = default_planted_chunks(spec.layout);
  EXPECT_GE(oracle_report(spec, r.selection()).recall, 0.95);

  ASSERT_EQ(cli("analyze" + data + " --top 32 --out " + at("all.json")).code, 0);
  EXPECT_EQ(load_report(path("all.json")).selection().size(), 32u);

  ASSERT_EQ(cli("select --report " + at("all.json") + " --alpha 0.05 --out " + at("sel.json")).code, 0);
  EXPECT_LT(load_report(path("sel.json")).selection().size(), 32u);

  const std::string validate = std::string("python3 '") + GAZECHUNK_SOURCE_DIR +
                               "/tests/support/validate_schema.py' '" + GAZECHUNK_SOURCE_DIR +
                               "/schemas/report.schema.json' " + at("r.json") + " " + at("sel.json") +
                               " >/dev/null 2>&1";
  EXPECT_EQ(std::system(validate.c_str()), 0);
}

TEST_F(Cli, ManipulateEmptyMaskIsByteIdentical) {
  small_synth("d");
  const CliResult r = cli("manipulate --latents " + at("d/latents.lgz") + " --labels " + at("d/labels.csv") +
                    " --chunks '' --donor-latents " + at("d/latents.lgz") + " --donor-index 0 --out-latents " +
                    at("same.lgz"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(read_file(path("same.lgz")), read_file(path("d/latents.lgz")));
}

TEST_F(Cli, TrainEvalOnExactLinearData) {
  const LatentLayout layout(1, 4, 2);
  std::mt19937_64 engine(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LatentDataset ds(layout);
  for (int i = 0; i < 64; ++i) {
    std::vector<double> v(4);
    for (double& x : v) x = static_cast<float>(u(engine));
    ds.add(std::to_string(i), v, {20.0 * v[0] - 10.0 * v[1] + 5.0 * v[2], 8.0 * v[3] - 4.0 * v[0]});
  }
  save_dataset(ds, path("lin.lgz"), path("lin.csv"));
  const std::string data = " --latents " + at("lin.lgz") + " --labels " + at("lin.csv");
  ASSERT_EQ(cli("train" + data +
                " --all-chunks --lr 0.02 --momentum 0.9 --epochs 2000 --batch-size 16 --hidden 16 --out " +
                at("m.lgzt"))
                .code,
            0);
  const CliResult r = cli("eval --model " + at("m.lgzt") + data);
  ASSERT_EQ(r.code, 0);
  EXPECT_LT(json::parse(r.out)["mean_angular_error_deg"].get<double>(), 0.5);
}

TEST_F(Cli, ShiftsimGradCheck) {
  const CliResult r = cli("shiftsim --grad-check");
  ASSERT_EQ(r.code, 0);
  const json doc = json::parse(r.out);
  EXPECT_LT(doc["max_relative_error"].get<double>(), 1e-4);
  EXPECT_TRUE(doc["passed"].get<bool>());
}

TEST_F(Cli, ExitCodes) {
  small_synth("d");
  const std::string data = " --latents " + at("d/latents.lgz") + " --labels " + at("d/labels.csv");
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("analyze --latents " + at("missing.lgz") + " --labels x --out " + at("r.json")).code, 2);
  write_text(path("bad.json"), R"({"n_samples": "many"})");
  EXPECT_EQ(cli("synth --spec " + at("bad.json") + " --out " + at("x")).code, 2);
  EXPECT_EQ(cli("analyze" + data + " --top 5 --alpha 0.1 --out " + at("r.json")).code, 2);
  EXPECT_EQ(cli("analyze" + data + " --left-range 89:90 --right-range=-90:-89.99 --out " + at("r.json")).code, 3);
  EXPECT_EQ(cli("train" + data + " --chunks 1 --lr 1e15 --epochs 3 --out " + at("m.lgzt")).code, 4);
}

}  // namespace
}  // namespace gazechunk
