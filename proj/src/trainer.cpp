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

#include "povm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "povm/parallel.hpp"
#include "povm/random.hpp"

namespace povm {

void TrainConfig::validate(int system_size) const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("training config: " + what); };
  if (buffer_batch < 2 || buffer_batch % 2 != 0) fail("buffer_batch must be even and at least 2");
  if (grad_batch < 1 || grad_batch > buffer_batch) fail("grad_batch must be in [1, buffer_batch]");
  if (grad_chunk < 1) fail("grad_chunk must be positive");
  if (sample_chunk < 1) fail("sample_chunk must be positive");
  if (steps < 0) fail("steps must be non-negative");
  if (!(lr >= 0.0)) fail("lr must be non-negative");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
  for (double b : {betas_initial[0], betas_initial[1], betas_final[0], betas_final[1]})
    if (!(b >= 0.0 && b < 1.0)) fail("betas must lie in [0, 1)");
  if (pool_weight != 1 && pool_weight != 2) fail("pool weight must be 1 or 2");
  if (pool_range < 1 || (pool_weight == 2 && pool_range < 2)) fail("pool range too small for the weight");
  if (pool_range > system_size) fail("pool range exceeds the system size");
  if (!(tolerance.tau >= 0.0)) fail("tau must be non-negative");
  if (!(tolerance.s > 0.0)) fail("s must be positive");
  if (!(lambda_tgt_min > 0.0 && lambda_tgt_min < lambda_tgt_max)) fail("lambda_tgt bounds must satisfy 0 < min < max");
  if (lambda_tgt_initial < lambda_tgt_min || lambda_tgt_initial > lambda_tgt_max)
    fail("lambda_tgt initial value outside its bounds");
  if (!(lambda_eta >= 0.0)) fail("lambda_eta must be non-negative");
  if (!(lambda_p_ref >= 0.0 && lambda_p_ref <= 1.0)) fail("lambda_p_ref must lie in [0, 1]");
  if (!(temperature_final > 0.0 && temperature_final <= temperature_initial && temperature_initial <= 1.0))
    fail("temperatures must satisfy 0 < final <= initial <= 1");
  if (!(temperature_fraction > 0.0 && temperature_fraction <= 1.0)) fail("temperature fraction must lie in (0, 1]");
}

nlohmann::json to_json(const StepMetrics& m) {
  nlohmann::json j;
  j["step"] = m.step;
  j["energy"] = m.energy;
  j["energy_stderr"] = m.energy_stderr;
  j["energy_density"] = m.energy_density;
  j["energy_density_vs_reference"] = m.delta_density ? nlohmann::json(*m.delta_density) : nlohmann::json(nullptr);
  j["grad_energy"] = m.grad_energy;
  j["psd_loss"] = m.constraints.loss;
  j["P"] = m.constraints.violation;
  j["active_modes"] = m.constraints.active_modes;
  const auto& mins = m.constraints.min_lambda_val;
  j["min_lambda_val"] = mins.empty() ? 0.0 : *std::min_element(mins.begin(), mins.end());
  j["min_lambda_val_k"] = mins;
  j["tau_k"] = m.constraints.tau_k;
  j["lambda_psd"] = m.lambda_psd;
  j["lambda_tgt"] = m.lambda_tgt;
  j["T"] = m.temperature;
  j["beta1"] = m.beta1;
  j["beta2"] = m.beta2;
  j["grad_norm_energy"] = m.grad_norm_energy;
  j["grad_norm_psd"] = m.grad_norm_psd;
  j["grad_cosine"] = m.grad_cosine;
  return j;
}

double adaptive_lambda(const Eigen::VectorXd& grad_e, const Eigen::VectorXd& grad_psd, double lambda_tgt) {
  const double np = grad_psd.norm();
  if (np == 0.0) return 0.0;
  return lambda_tgt * grad_e.norm() / np;
}

Eigen::VectorXd project_conflict(const Eigen::VectorXd& grad_e, const Eigen::VectorXd& grad_psd, double violation) {
  const double n2 = grad_psd.squaredNorm();
  const double dot = grad_e.dot(grad_psd);
  if (n2 == 0.0 || dot >= 0.0) return grad_e;
  return grad_e - (violation * dot / n2) * grad_psd;
}

double beta_coordinate(double lambda_tgt, double lambda_min, double lambda_max) {
  const double x = (std::log(lambda_tgt) - std::log(lambda_min)) / (std::log(lambda_max) - std::log(lambda_min));
  return std::clamp(x, 0.0, 1.0);
}

std::array<double, 2> interpolate_betas(double x, const std::array<double, 2>& initial,
                                        const std::array<double, 2>& final) {
  return {initial[0] + x * (final[0] - initial[0]), initial[1] + x * (final[1] - initial[1])};
}

Eigen::VectorXd adamw_update(AdamState& s, const Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr,
                             double beta1, double beta2, double weight_decay, double eps) {
  if (s.m.size() != params.size()) {
    s.m = Eigen::VectorXd::Zero(params.size());
    s.v = Eigen::VectorXd::Zero(params.size());
  }
  s.m = beta1 * s.m + (1.0 - beta1) * grad;
  s.v = beta2 * s.v + (1.0 - beta2) * grad.cwiseAbs2();
  // the betas move with lambda_tgt, so the bias correction tracks their running product
  s.beta1_power *= beta1;
  s.beta2_power *= beta2;
  ++s.updates;
  const Eigen::ArrayXd mhat = s.m.array() / (1.0 - s.beta1_power);
  const Eigen::ArrayXd vhat = s.v.array() / (1.0 - s.beta2_power);
  return (-lr * (mhat / (vhat.sqrt() + eps) + weight_decay * params.array())).matrix();
}

double adapt_lambda_tgt(double lambda_tgt, double violation, const TrainConfig& cfg) {
  return std::clamp(lambda_tgt * (1.0 + cfg.lambda_eta * (violation - cfg.lambda_p_ref)), cfg.lambda_tgt_min,
                    cfg.lambda_tgt_max);
}

double anneal_temperature(long long step, long long total_steps, const TrainConfig& cfg) {
  const double t0 = cfg.temperature_initial, tf = cfg.temperature_final;
  const double horizon = cfg.temperature_fraction * double(total_steps);
  if (horizon <= 0.0) return t0;
  if (double(step) >= horizon) return tf;
  const double log_gamma = std::log(tf / t0) / horizon;
  return std::max(tf, t0 * std::exp(log_gamma * double(step)));
}

Trainer::Trainer(const HamiltonianSpec& h, const TrainConfig& cfg, DualStreamModel model,
                 std::optional<double> reference_density)
    : h_(h), cfg_(cfg), model_(std::move(model)), reference_density_(reference_density), energy_(h) {
  cfg_.validate(h.system_size);
  gram_ = cached_gram_expansion(generate_templates(cfg_.pool_weight, cfg_.pool_range), h.system_size);
  state_.lambda_tgt = cfg_.lambda_tgt_initial;
  state_.temperature = cfg_.temperature_initial;
}

EnergyReport Trainer::evaluate(int count, std::uint64_t seed) const {
  const InferenceSamples s = sample_inference(model_, h_.system_size, count, seed, cfg_.sample_chunk);
  return energy_.report(SiteValues::from_outcomes(s.outcomes), reference_density_);
}

namespace {

std::string dump(const StepMetrics& m, const std::string& what) {
  std::ostringstream os;
  os << "non-finite " << what << " at step " << m.step << ": " << to_json(m).dump();
  return os.str();
}

}  // namespace

BatchGradients batch_gradients(const DualStreamModel& model, const GumbelSamples& samples, GradientEstimator estimator,
                               const EnergyEstimator& energy, const GramExpansion& gram,
                               const Eigen::VectorXd& d_means_psd, double weight) {
  const int n = samples.outcomes().size(), L = samples.outcomes().length();
  const SiteValues v = estimator == GradientEstimator::relaxed ? SiteValues::from_soft(samples.soft, L)
                                                               : SiteValues::from_outcomes(samples.outcomes());
  BatchGradients r;
  r.energy_means = energy.strings().means(v);
  r.gram_means = gram.strings().means(v);
  Eigen::ArrayXXd d_cols = Eigen::ArrayXXd::Zero(n, 3 * L);
  energy.strings().pullback(v, weight * energy.coefficients(), d_cols);
  r.grad_e = backward(model, samples, site_value_pullback(d_cols, L)).flatten();
  if (d_means_psd.size() > 0) {
    d_cols.setZero();
    gram.strings().pullback(v, weight * d_means_psd, d_cols);
    r.grad_psd = backward(model, samples, site_value_pullback(d_cols, L)).flatten();
  }
  return r;
}

StepMetrics Trainer::step() {
  const auto start = std::chrono::steady_clock::now();
  const long long k = state_.step;
  const int L = h_.system_size;
  const std::uint64_t step_id = std::uint64_t(k);
  StepMetrics out;
  out.step = k;
  const double T = anneal_temperature(k, cfg_.steps, cfg_);
  state_.temperature = T;
  out.temperature = T;
  out.lambda_tgt = state_.lambda_tgt;

  // buffer step: inference samples, energy and noise-calibrated spectra
  const InferenceSamples buffer =
      sample_inference(model_, L, cfg_.buffer_batch, derive_seed(cfg_.seed, {1, step_id}), cfg_.sample_chunk);
  const EnergyReport er = energy_.report(SiteValues::from_outcomes(buffer.outcomes), reference_density_);
  out.energy = er.energy;
  out.energy_stderr = er.energy_stderr;
  out.energy_density = er.energy_density;
  out.delta_density = er.delta_density;
  const SplitHalves halves = split_halves(buffer.outcomes, derive_seed(cfg_.seed, {2, step_id}));
  const SpectralData spectrum = validate_spectrum(build_gram(halves.train, *gram_, GramSource::train),
                                                  build_gram(halves.validation, *gram_, GramSource::val),
                                                  cfg_.tolerance);
  PsdLoss psd = psd_weights(spectrum);
  const double violation = psd.report.violation;

  Eigen::VectorXd d_means_psd = Eigen::VectorXd::Zero(gram_->strings().size());
  if (cfg_.constraints) gram_->pullback(psd.weights, d_means_psd);

  // gradient step: Gumbel samples in chunks
  const int G = cfg_.grad_batch, C = std::min(cfg_.grad_chunk, G);
  const int chunks = (G + C - 1) / C;
  std::vector<BatchGradients> results(chunks);
  const Eigen::VectorXd no_constraint;
  parallel_for(chunks, [&](int c) {
    const int n = std::min(C, G - c * C);
    const GumbelSamples gs = sample_gumbel_st(model_, L, n, T, derive_seed(cfg_.seed, {3, step_id, std::uint64_t(c)}));
    results[c] = batch_gradients(model_, gs, cfg_.estimator, energy_, *gram_,
                                 cfg_.constraints ? d_means_psd : no_constraint, double(n) / G);
  });
  const Eigen::Index np = model_.num_parameters();
  Eigen::VectorXd grad_e = Eigen::VectorXd::Zero(np), grad_psd = Eigen::VectorXd::Zero(np);
  Eigen::VectorXd energy_means = Eigen::VectorXd::Zero(energy_.strings().size());
  Eigen::VectorXd gram_means = Eigen::VectorXd::Zero(gram_->strings().size());
  for (int c = 0; c < chunks; ++c) {
    const double frac = double(std::min(C, G - c * C)) / G;
    grad_e += results[c].grad_e;
    if (cfg_.constraints) grad_psd += results[c].grad_psd;
    energy_means += frac * results[c].energy_means;
    gram_means += frac * results[c].gram_means;
  }
  out.grad_energy = energy_.coefficients().dot(energy_means);
  psd = psd_loss(spectrum, gram_from_means(gram_means, *gram_, GramSource::grad, G));
  out.constraints = psd.report;
  out.grad_norm_energy = grad_e.norm();
  out.grad_norm_psd = grad_psd.norm();
  if (out.grad_norm_energy > 0.0 && out.grad_norm_psd > 0.0)
    out.grad_cosine = grad_e.dot(grad_psd) / (out.grad_norm_energy * out.grad_norm_psd);
  if (!std::isfinite(out.grad_energy) || !std::isfinite(out.constraints.loss)) throw NumericalError(dump(out, "loss"));
  if (!grad_e.allFinite() || !grad_psd.allFinite()) throw NumericalError(dump(out, "gradient"));

  // balance, project, update
  Eigen::VectorXd grad = grad_e;
  double lambda_psd = 0.0;
  if (cfg_.constraints) {
    lambda_psd = adaptive_lambda(grad_e, grad_psd, state_.lambda_tgt);
    grad = project_conflict(grad_e, grad_psd, violation) + lambda_psd * grad_psd;
  }
  out.lambda_psd = lambda_psd;
  const auto betas = interpolate_betas(beta_coordinate(state_.lambda_tgt, cfg_.lambda_tgt_min, cfg_.lambda_tgt_max),
                                       cfg_.betas_initial, cfg_.betas_final);
  out.beta1 = betas[0];
  out.beta2 = betas[1];
  Eigen::VectorXd theta = model_.flatten();
  theta += adamw_update(state_.adam, theta, grad, cfg_.lr, betas[0], betas[1], cfg_.weight_decay, cfg_.adam_eps);
  if (!theta.allFinite()) throw NumericalError(dump(out, "parameters"));
  model_.unflatten(theta);

  if (cfg_.constraints) state_.lambda_tgt = adapt_lambda_tgt(state_.lambda_tgt, violation, cfg_);
  state_.lambda_psd = lambda_psd;
  ++state_.step;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Checkpoint make_checkpoint(const Trainer& t) {
  Checkpoint c;
  c.model = t.model();
  const TrainState& s = t.state();
  c.metadata["step"] = s.step;
  c.metadata["lambda_tgt"] = s.lambda_tgt;
  c.metadata["temperature"] = s.temperature;
  c.metadata["lambda_psd"] = s.lambda_psd;
  c.metadata["adam"] = {{"beta1_power", s.adam.beta1_power},
                        {"beta2_power", s.adam.beta2_power},
                        {"updates", s.adam.updates}};
  c.metadata["system_size"] = t.gram_expansion().system_size();
  if (s.adam.m.size() > 0) {
    c.extra["adam.m"] = s.adam.m;
    c.extra["adam.v"] = s.adam.v;
  }
  return c;
}

void restore_checkpoint(Trainer& t, const Checkpoint& c) {
  if (!(c.model.dims() == t.model().dims())) throw std::invalid_argument("checkpoint: model dimensions differ");
  t.model() = c.model;
  TrainState& s = t.state();
  const auto& m = c.metadata;
  s.step = m.value("step", 0LL);
  s.lambda_tgt = m.value("lambda_tgt", t.config().lambda_tgt_initial);
  s.temperature = m.value("temperature", t.config().temperature_initial);
  s.lambda_psd = m.value("lambda_psd", 0.0);
  if (m.contains("adam")) {
    s.adam.beta1_power = m["adam"].value("beta1_power", 1.0);
    s.adam.beta2_power = m["adam"].value("beta2_power", 1.0);
    s.adam.updates = m["adam"].value("updates", 0LL);
  }
  if (c.extra.count("adam.m")) {
    s.adam.m = c.extra.at("adam.m").col(0);
    s.adam.v = c.extra.at("adam.v").col(0);
  }
}

}  // namespace povm
