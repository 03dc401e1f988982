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
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "povm/config.hpp"
#include "povm/estimators.hpp"

namespace povm::cli {

/// Reported thresholds were exceeded (exit code 4).
class ThresholdFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run directories that cannot be compared.
class IncompatibleRuns : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kNumericalError = 3, kThresholdFailure = 4 };

std::string version_string();

struct TrainOptions {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;  // replaces the training seed
  std::optional<std::filesystem::path> resume;
  int log_every = 0;  // 0 picks about fifty lines per run
};

/// Trains and writes manifest.json, metrics.jsonl, timing.jsonl,
/// checkpoints/, energy.json and correlators.csv. Returns the run directory.
std::filesystem::path cmd_train(ExperimentConfig cfg, const TrainOptions& opt, std::ostream& log);

/// Exact reference: reference.json, energy.json, correlators.csv and, for
/// L <= 8, calibration.csv built from exact ground-state samples.
std::filesystem::path cmd_oracle(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out,
                                 std::ostream& log);

struct EvaluateOptions {
  std::filesystem::path checkpoint;
  std::optional<int> batch;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  /// When given, model and network must match the checkpoint.
  std::optional<ExperimentConfig> expected;
};

struct Evaluation {
  EnergyReport energy;
  std::vector<CorrelatorTable> correlators;  // X, Y, Z
};

std::filesystem::path cmd_evaluate(const EvaluateOptions& opt, std::ostream& log);

struct Comparison {
  int system_size = 0;
  std::string model;
  double delta_density = 0.0;
  double max_correlator_deviation = 0.0;
  std::string worst_channel;
  int worst_distance = 0;
  double energy_threshold = 0.0;
  double correlator_threshold = 0.0;
  bool passed = false;
};

nlohmann::json to_json(const Comparison& c);

/// Deviation of a run (or evaluation) directory from an oracle directory.
/// Thresholds default to the run's stored configuration.
Comparison compare_dirs(const std::filesystem::path& run, const std::filesystem::path& oracle,
                        std::optional<double> energy_threshold = std::nullopt,
                        std::optional<double> correlator_threshold = std::nullopt);

/// compare_dirs plus compare.json in the run directory; throws
/// ThresholdFailure after writing when a threshold is exceeded.
Comparison cmd_compare(const std::filesystem::path& run, const std::filesystem::path& oracle, std::ostream& log);

// shared helpers
Evaluation evaluate_model(const DualStreamModel& model, const HamiltonianSpec& h, int count, std::uint64_t seed,
                          std::optional<double> reference_density, bool translation_average, int chunks,
                          int sample_chunk);
void write_energy(const std::filesystem::path& path, const EnergyReport& r, const HamiltonianSpec& h);
void write_correlators(const std::filesystem::path& path, const std::vector<CorrelatorTable>& tables);
std::vector<CorrelatorTable> read_correlators(const std::filesystem::path& path);

}  // namespace povm::cli
