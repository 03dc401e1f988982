// Copyright 2026 The povm-ground Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "povm/commands.hpp"
#include "povm/oracle.hpp"

using namespace povm;
namespace fs = std::filesystem;

namespace {

ExperimentConfig smoke() {
  return parse_config(R"(
model: {preset: TFIM, system_size: 4}
training: {buffer_batch: 256, grad_batch: 32, steps: 6, lr: 1.0e-2, checkpoint_interval: 3}
network: {hidden: 4, layers: 1}
oracle: {calibration_samples: 2000}
evaluation: {chunks: 4}
)");
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("povm_cli_" + std::to_string(::getpid()))) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("train, oracle, evaluate and compare") {
  TempDir tmp;
  std::ostringstream log;
  const ExperimentConfig cfg = smoke();

  const fs::path run = cli::cmd_train(cfg, {tmp.path / "run", std::nullopt, std::nullopt, 0}, log);
  for (const char* f : {"manifest.json", "metrics.jsonl", "timing.jsonl", "energy.json", "correlators.csv",
                        "checkpoints/step_000003.ckpt", "checkpoints/final.ckpt"})
    CHECK(fs::exists(run / f));
  const auto manifest = nlohmann::json::parse(slurp(run / "manifest.json"));
  CHECK(manifest["seeds"]["train"] == 2);
  CHECK(manifest["config"]["model"]["preset"] == "TFIM");
  const std::string metrics = slurp(run / "metrics.jsonl");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 6);

  SECTION("seeded reruns are byte-identical") {
    cli::cmd_train(cfg, {tmp.path / "again", std::nullopt, std::nullopt, 0}, log);
    CHECK(slurp(tmp.path / "again" / "metrics.jsonl") == metrics);
    cli::cmd_train(cfg, {tmp.path / "other", std::uint64_t{7}, std::nullopt, 0}, log);
    CHECK(slurp(tmp.path / "other" / "metrics.jsonl") != metrics);
  }

  SECTION("resume continues the same trajectory") {
    ExperimentConfig shorter = cfg;
    cli::cmd_train(shorter, {tmp.path / "resumed", std::nullopt, run / "checkpoints/step_000003.ckpt", 0}, log);
    const std::string tail = slurp(tmp.path / "resumed" / "metrics.jsonl");
    CHECK(metrics.find(tail) != std::string::npos);
    CHECK(std::count(tail.begin(), tail.end(), '\n') == 3);
  }

  const fs::path orc = cli::cmd_oracle(cfg, tmp.path / "oracle", log);
  const auto ref = nlohmann::json::parse(slurp(orc / "reference.json"));
  CHECK(ref["energy"].get<double>() == Catch::Approx(oracle::ground_state(cfg.hamiltonian()).energy));
  CHECK(fs::exists(orc / "calibration.csv"));

  SECTION("oracle against itself passes with zero deviation") {
    const auto c = cli::compare_dirs(orc, orc, 0.0, 0.0);
    CHECK(c.delta_density == 0.0);
    CHECK(c.max_correlator_deviation == 0.0);
  }

  SECTION("threshold failures are reported and recorded") {
    const auto c = cli::compare_dirs(run, orc, 1e-9, 1e-9);
    CHECK_FALSE(c.passed);
    CHECK(cli::compare_dirs(run, orc, 100.0, 100.0).passed);
    CHECK_THROWS_AS(cli::cmd_compare(run, orc, log), cli::ThresholdFailure);
    CHECK(fs::exists(run / "compare.json"));
  }

  SECTION("evaluate a checkpoint") {
    cli::EvaluateOptions opt;
    opt.checkpoint = run / "checkpoints/final.ckpt";
    opt.batch = 512;
    opt.expected = cfg;
    const fs::path ev = cli::cmd_evaluate(opt, log);
    CHECK(ev == run / "checkpoints" / "eval_final");
    CHECK(cli::read_correlators(ev / "correlators.csv").size() == 3);
    const auto e = nlohmann::json::parse(slurp(ev / "energy.json"));
    CHECK(e["samples"] == 512);

    ExperimentConfig other = cfg;
    other.preset = "Heisenberg";
    opt.expected = other;
    CHECK_THROWS_AS(cli::cmd_evaluate(opt, log), ConfigError);
  }

  SECTION("incompatible directories") {
    ExperimentConfig big = cfg;
    big.system_size = 6;
    const fs::path orc6 = cli::cmd_oracle(big, tmp.path / "oracle6", log);
    CHECK_THROWS_AS(cli::compare_dirs(run, orc6), cli::IncompatibleRuns);
  }
}

TEST_CASE("oracle refuses large systems") {
  ExperimentConfig c = smoke();
  c.system_size = 14;
  std::ostringstream log;
  CHECK_THROWS_AS(cli::cmd_oracle(c, fs::temp_directory_path() / "povm_never", log), ConfigError);
}

TEST_CASE("correlator csv round trip") {
  CorrelatorTable t;
  t.channel = Axis::Y;
  t.values = {0.1, -0.25, 1.0 / 3.0};
  t.stderr = {0.0, 0.01, 0.02};
  std::vector<CorrelatorTable> tables(3, t);
  tables[0].channel = Axis::X;
  tables[2].channel = Axis::Z;
  const fs::path p = fs::temp_directory_path() / "povm_corr_roundtrip.csv";
  cli::write_correlators(p, tables);
  const auto back = cli::read_correlators(p);
  fs::remove(p);
  REQUIRE(back.size() == 3);
  CHECK(back[1].values == t.values);
  CHECK(back[1].stderr == t.stderr);
}
