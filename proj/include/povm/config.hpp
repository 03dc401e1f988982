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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "povm/hamiltonian.hpp"
#include "povm/model.hpp"
#include "povm/trainer.hpp"

namespace povm {

/// Invalid configuration; the message carries the file and line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // model
  std::string preset = "GappedTFIM";  // TFIM | GappedTFIM | Heisenberg | custom
  int system_size = 8;
  std::vector<std::string> terms;  // custom only, e.g. "0.5 X0 X1"
  bool translate = true;
  // pool, tolerance, training, temperature
  TrainConfig train;
  int checkpoint_interval = 0;  // 0 disables periodic checkpoints
  // network
  ModelDims network{64, 2, true};
  // seeds
  std::uint64_t init_seed = 1;
  std::uint64_t train_seed = 2;
  std::uint64_t eval_seed = 3;
  // output
  std::string output_dir = "runs/default";
  // oracle
  std::string oracle_compare = "auto";  // auto | on | off
  int calibration_samples = 100000;
  // evaluation
  int eval_batch = 0;  // 0 means the buffer batch
  int eval_chunks = 20;
  bool translation_average = false;
  // thresholds
  double energy_threshold = 0.02;
  double correlator_threshold = 0.1;

  HamiltonianSpec hamiltonian() const;
  /// Oracle reference requested and available (L <= 12 for auto).
  bool use_oracle() const;
  int evaluation_batch() const { return eval_batch > 0 ? eval_batch : train.buffer_batch; }
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every field, in the same sections as the YAML document.
nlohmann::json to_json(const ExperimentConfig& c);
/// Inverse of to_json; used to recover the configuration stored in checkpoints.
ExperimentConfig config_from_json(const nlohmann::json& j);

}  // namespace povm
