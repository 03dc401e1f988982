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

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"
#include "povm/checkpoint.hpp"
#include "povm/constraints.hpp"
#include "povm/estimators.hpp"
#include "povm/hamiltonian.hpp"
#include "povm/model.hpp"
#include "povm/pauli.hpp"

namespace povm {

/// Raised when a loss or gradient stops being finite. what() carries a dump
/// of the offending step.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GradientEstimator {
  /// Hard outcomes in the forward values, softmax relaxation in the backward pass.
  straight_through,
  /// Relaxed one-hot vectors in the forward values as well; differentiable
  /// for fixed noise.
  relaxed,
};

struct TrainConfig {
  int buffer_batch = 8192;
  int grad_batch = 512;
  /// Gradient samples per tape; chunk gradients are summed.
  int grad_chunk = 512;
  int steps = 2000;
  double lr = 1e-3;
  double weight_decay = 1e-3;
  double adam_eps = 1e-8;
  std::array<double, 2> betas_initial{0.7, 0.9};
  std::array<double, 2> betas_final{0.95, 0.99};
  Tolerance tolerance;
  int pool_weight = 2;
  int pool_range = 2;
  bool constraints = true;
  double lambda_tgt_initial = 1.0;
  double lambda_tgt_min = 0.99;
  double lambda_tgt_max = 1.4;
  double lambda_eta = 0.02;
  double lambda_p_ref = 0.5;
  double temperature_initial = 1.0;
  double temperature_final = 0.1;
  double temperature_fraction = 0.6;
  GradientEstimator estimator = GradientEstimator::straight_through;
  std::uint64_t seed = 1;
  int sample_chunk = 1024;

  /// Throws std::invalid_argument naming the offending field.
  void validate(int system_size) const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  double beta1_power = 1.0;
  double beta2_power = 1.0;
  long long updates = 0;
};

struct TrainState {
  long long step = 0;
  AdamState adam;
  double lambda_tgt = 1.0;
  double temperature = 1.0;
  double lambda_psd = 0.0;
};

struct StepMetrics {
  long long step = 0;
  double energy = 0.0;
  double energy_stderr = 0.0;
  double energy_density = 0.0;
  std::optional<double> delta_density;
  double grad_energy = 0.0;  // energy estimate on the gradient samples
  ConstraintReport constraints;
  double lambda_psd = 0.0;
  double lambda_tgt = 0.0;
  double temperature = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double grad_norm_energy = 0.0;
  double grad_norm_psd = 0.0;
  double grad_cosine = 0.0;  // between raw energy and PSD gradients
  double seconds = 0.0;  // wall clock; not part of the JSON record
};

/// Deterministic metrics record (no timing).
nlohmann::json to_json(const StepMetrics& m);

/// lambda_tgt * |grad_E| / |grad_PSD|, or 0 when grad_PSD vanishes.
double adaptive_lambda(const Eigen::VectorXd& grad_e, const Eigen::VectorXd& grad_psd, double lambda_tgt);

/// Removes a fraction P of the component of grad_E along grad_PSD when the
/// two anti-align.
Eigen::VectorXd project_conflict(const Eigen::VectorXd& grad_e, const Eigen::VectorXd& grad_psd, double violation);

/// Interpolation coordinate of lambda_tgt on a log scale, clamped to [0, 1].
double beta_coordinate(double lambda_tgt, double lambda_min, double lambda_max);
std::array<double, 2> interpolate_betas(double x, const std::array<double, 2>& initial,
                                        const std::array<double, 2>& final);

/// Decoupled weight decay Adam step; returns the parameter delta.
Eigen::VectorXd adamw_update(AdamState& state, const Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr,
                             double beta1, double beta2, double weight_decay, double eps = 1e-8);

double adapt_lambda_tgt(double lambda_tgt, double violation, const TrainConfig& cfg);

/// max(T_final, T_0 gamma^step) with T reaching T_final at fraction * total.
double anneal_temperature(long long step, long long total_steps, const TrainConfig& cfg);

struct BatchGradients {
  Eigen::VectorXd grad_e, grad_psd;
  Eigen::VectorXd energy_means, gram_means;
};

/// Parameter gradients of the energy and of the constraint loss on one Gumbel
/// batch, both scaled by `weight`. `d_means_psd` is d(constraint loss)/d(Gram
/// string means); an empty vector skips the constraint pass.
BatchGradients batch_gradients(const DualStreamModel& model, const GumbelSamples& samples, GradientEstimator estimator,
                               const EnergyEstimator& energy, const GramExpansion& gram,
                               const Eigen::VectorXd& d_means_psd, double weight);

class Trainer {
 public:
  Trainer(const HamiltonianSpec& h, const TrainConfig& cfg, DualStreamModel model,
          std::optional<double> reference_density = std::nullopt);

  StepMetrics step();
  /// Energy report of the current model on `count` inference samples.
  EnergyReport evaluate(int count, std::uint64_t seed) const;

  const DualStreamModel& model() const { return model_; }
  DualStreamModel& model() { return model_; }
  TrainState& state() { return state_; }
  const TrainState& state() const { return state_; }
  const TrainConfig& config() const { return cfg_; }
  const EnergyEstimator& energy_estimator() const { return energy_; }
  const GramExpansion& gram_expansion() const { return *gram_; }

 private:
  HamiltonianSpec h_;
  TrainConfig cfg_;
  DualStreamModel model_;
  std::optional<double> reference_density_;
  TrainState state_;
  EnergyEstimator energy_;
  std::shared_ptr<const GramExpansion> gram_;
};

/// Model, optimizer moments and counters.
Checkpoint make_checkpoint(const Trainer& t);
/// Restores model and optimizer state; throws on a dimension mismatch.
void restore_checkpoint(Trainer& t, const Checkpoint& ckpt);

}  // namespace povm
