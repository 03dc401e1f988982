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

// povm: train, evaluate, oracle and compare front end.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "povm/commands.hpp"
#include "povm/config.hpp"
#include "povm/trainer.hpp"

namespace fs = std::filesystem;
using namespace povm;

int main(int argc, char** argv) {
  CLI::App app{"Variational ground states in a tetrahedral POVM basis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::version_string());

  std::string config_path, out, checkpoint, run_dir, oracle_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> batch;
  int log_every = 0;

  auto* train = app.add_subcommand("train", "Train a model and write a run directory");
  train->add_option("--config", config_path, "YAML configuration")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Run directory (overrides output.directory)");
  train->add_option("--seed", seed, "Training seed override");
  train->add_option("--checkpoint", checkpoint, "Resume from this checkpoint")->check(CLI::ExistingFile);
  train->add_option("--log-every", log_every, "Progress line interval in steps");

  auto* orc = app.add_subcommand("oracle", "Exact reference tables for L <= 12");
  orc->add_option("--config", config_path, "YAML configuration")->required()->check(CLI::ExistingFile);
  orc->add_option("--out", out, "Output directory (default <output.directory>/oracle)");
  orc->add_option("--seed", seed, "Calibration sampling seed override");

  auto* eval = app.add_subcommand("evaluate", "Estimate energy and correlators from a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--batch", batch, "Inference batch (default: the training buffer batch)");
  eval->add_option("--seed", seed, "Evaluation seed override");
  eval->add_option("--config", config_path, "Configuration that must match the checkpoint")->check(CLI::ExistingFile);
  eval->add_option("--out", out, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Compare a run or evaluation directory with an oracle directory");
  cmp->add_option("run", run_dir, "Run or evaluation directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("oracle", oracle_dir, "Oracle directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kConfigError;
  }

  try {
    if (train->parsed()) {
      cli::TrainOptions opt;
      if (!out.empty()) opt.out = out;
      opt.seed = seed;
      if (!checkpoint.empty()) opt.resume = checkpoint;
      opt.log_every = log_every;
      cli::cmd_train(load_config(config_path), opt, std::cout);
    } else if (orc->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      if (seed) cfg.eval_seed = *seed;
      cli::cmd_oracle(cfg, out.empty() ? std::nullopt : std::optional<fs::path>(out), std::cout);
    } else if (eval->parsed()) {
      cli::EvaluateOptions opt;
      opt.checkpoint = checkpoint;
      opt.batch = batch;
      opt.seed = seed;
      if (!out.empty()) opt.out = out;
      if (!config_path.empty()) opt.expected = load_config(config_path);
      cli::cmd_evaluate(opt, std::cout);
    } else if (cmp->parsed()) {
      cli::cmd_compare(run_dir, oracle_dir, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cli::kNumericalError;
  } catch (const cli::ThresholdFailure& e) {
    std::cerr << e.what() << "\n";
    return cli::kThresholdFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return cli::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kFailure;
  }
  return cli::kOk;
}
