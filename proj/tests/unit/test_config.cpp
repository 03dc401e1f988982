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

#include <string>

#include "povm/config.hpp"

using namespace povm;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("full document") {
  const ExperimentConfig c = parse_config(R"(
model:
  preset: GappedTFIM
  system_size: 6
pool:
  weight: 2
  range: 3
tolerance:
  tau: 1.5
  s: 0.5
training:
  buffer_batch: 1024
  grad_batch: 128
  steps: 77
  lr: 2.0e-3
  betas_initial: [0.6, 0.8]
  constraints: false
  estimator: relaxed
  checkpoint_interval: 10
network:
  hidden: 16
  layers: 3
  dual_stream: false
temperature:
  final: 0.2
seeds:
  init: 11
  train: 12
  eval: 13
output:
  directory: runs/x
oracle:
  compare: on
  calibration_samples: 500
evaluation:
  batch: 4096
  chunks: 8
thresholds:
  energy_density: 0.01
  correlator: 0.05
)");
  CHECK(c.preset == "GappedTFIM");
  CHECK(c.system_size == 6);
  CHECK(c.train.pool_range == 3);
  CHECK(c.train.tolerance.tau == 1.5);
  CHECK(c.train.tolerance.s == 0.5);
  CHECK(c.train.buffer_batch == 1024);
  CHECK(c.train.steps == 77);
  CHECK(c.train.betas_initial[0] == 0.6);
  CHECK(c.train.betas_initial[1] == 0.8);
  CHECK_FALSE(c.train.constraints);
  CHECK(c.train.estimator == GradientEstimator::relaxed);
  CHECK(c.checkpoint_interval == 10);
  CHECK(c.network.hidden == 16);
  CHECK(c.network.layers == 3);
  CHECK_FALSE(c.network.dual_stream);
  CHECK(c.train.temperature_final == 0.2);
  CHECK(c.train.seed == 12);
  CHECK(c.eval_seed == 13);
  CHECK(c.output_dir == "runs/x");
  CHECK(c.oracle_compare == "on");
  CHECK(c.evaluation_batch() == 4096);
  CHECK(c.correlator_threshold == 0.05);
  CHECK(c.hamiltonian().system_size == 6);
}

TEST_CASE("empty document gives defaults") {
  const ExperimentConfig c = parse_config("");
  CHECK(c.preset == "GappedTFIM");
  CHECK(c.system_size == 8);
  CHECK(c.train.tolerance.tau == 1.0);
  CHECK(c.use_oracle());
}

TEST_CASE("gapless preset widens the offset unless set") {
  CHECK(parse_config("model: {preset: Heisenberg}").train.tolerance.tau == 4.0);
  CHECK(parse_config("model: {preset: Heisenberg}\ntolerance: {tau: 2.0}").train.tolerance.tau == 2.0);
  CHECK(parse_config("model: {preset: TFIM}").train.tolerance.tau == 1.0);
}

TEST_CASE("errors carry file and line") {
  CHECK_THAT(error_of("model:\n  preset: TFIM\n  sytem_size: 4\n"),
             ContainsSubstring("test.yaml:3") && ContainsSubstring("sytem_size"));
  CHECK_THAT(error_of("model:\n  preset: TFIM\nmodle:\n  x: 1\n"), ContainsSubstring("test.yaml:3"));
  CHECK_THAT(error_of("training:\n  steps: many\n"), ContainsSubstring("test.yaml:2") && ContainsSubstring("integer"));
  CHECK_THAT(error_of("training:\n  betas_initial: [0.1]\n"), ContainsSubstring("test.yaml:2"));
  CHECK_THAT(error_of("model:\n  preset: Ising\n"), ContainsSubstring("test.yaml:2"));
  CHECK_THAT(error_of("model: [unclosed\n"), ContainsSubstring("test.yaml"));
}

TEST_CASE("semantic checks") {
  CHECK_FALSE(error_of("training: {buffer_batch: 1001}").empty());
  CHECK_FALSE(error_of("model: {system_size: 4}\npool: {range: 9}").empty());
  CHECK_FALSE(error_of("model: {preset: custom}").empty());
  CHECK_FALSE(error_of("model: {preset: TFIM, terms: ['1 Z0']}").empty());
  CHECK_FALSE(error_of("model: {system_size: 20}\noracle: {compare: on}").empty());
  CHECK_FALSE(error_of("network: {hidden: 0}").empty());
  CHECK(error_of("model: {system_size: 20}").empty());
  CHECK_FALSE(parse_config("model: {system_size: 20}").use_oracle());
}

TEST_CASE("custom models") {
  const ExperimentConfig c = parse_config("model:\n  preset: custom\n  system_size: 4\n  terms: ['-1 Z0 Z1', '0.5 X0']\n");
  const HamiltonianSpec h = c.hamiltonian();
  CHECK(h.terms.size() == 8);
  CHECK_FALSE(error_of("model:\n  preset: custom\n  system_size: 4\n  terms: ['1 Q0']\n").empty());
}

TEST_CASE("json round trip") {
  const ExperimentConfig c = parse_config(
      "model: {preset: Heisenberg, system_size: 6}\ntraining: {steps: 5, lr: 0.5, betas_final: [0.9, 0.95]}\n"
      "network: {hidden: 4}\nseeds: {train: 99}\nthresholds: {correlator: 0.3}\n");
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.train.tolerance.tau == 4.0);
  CHECK(back.train.seed == 99);
  CHECK(back.network.hidden == 4);
  CHECK(back.train.betas_final[1] == 0.95);
}
