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

#include "povm/estimators.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

namespace povm {

double chunked_stderr(const Eigen::ArrayXd& values, int n_chunks) {
  if (n_chunks < 2) throw std::invalid_argument("chunked_stderr: need at least two chunks");
  const Eigen::Index n = values.size();
  if (n < n_chunks) throw std::invalid_argument("chunked_stderr: fewer samples than chunks");
  Eigen::ArrayXd means(n_chunks);
  for (int c = 0; c < n_chunks; ++c) {
    const Eigen::Index b = n * c / n_chunks, e = n * (c + 1) / n_chunks;
    means[c] = values.segment(b, e - b).mean();
  }
  const double var = (means - means.mean()).square().sum() / (n_chunks - 1);
  return std::sqrt(var / n_chunks);
}

namespace {

double weighted_mean(const SiteValues& v, const Eigen::ArrayXd& x) {
  return v.weighted() ? (v.weights() * x).sum() : x.mean();
}

double error_of(const SiteValues& v, const Eigen::ArrayXd& x, int chunks) {
  if (v.weighted() || x.size() < std::max(chunks, 2)) return 0.0;
  return chunked_stderr(x, chunks);
}

}  // namespace

CorrelatorTable estimate_correlators(const SiteValues& values, Axis channel, bool translation_average, int chunks) {
  if (values.samples() == 0) throw std::invalid_argument("estimate_correlators: empty sample set");
  if (channel == Axis::I) throw std::invalid_argument("estimate_correlators: channel must be X, Y or Z");
  const int L = values.sites();
  const auto& c = values.columns();
  CorrelatorTable t;
  t.channel = channel;
  t.translation_averaged = translation_average;
  for (int j = 0; j < L; ++j) {
    Eigen::ArrayXd x = Eigen::ArrayXd::Zero(values.samples());
    const int origins = translation_average ? L : 1;
    for (int o = 0; o < origins; ++o) {
      const auto a = c.col(SiteValues::column(o, channel));
      if (j == 0)
        x += a;
      else
        x += a * c.col(SiteValues::column((o + j) % L, channel));
    }
    x /= origins;
    t.values.push_back(weighted_mean(values, x));
    t.stderr.push_back(error_of(values, x, chunks));
  }
  return t;
}

EnergyEstimator::EnergyEstimator(const HamiltonianSpec& h) : h_(h) {
  h.validate();
  std::map<std::uint32_t, double> lin;
  for (const auto& term : h.terms) lin[energy_strings_.insert(term.op)] += term.coef;
  energy_coefs_ = Eigen::VectorXd::Zero(energy_strings_.size());
  for (auto [k, c] : lin) energy_coefs_[k] = c;

  std::map<std::uint32_t, std::complex<double>> sq;
  for (const auto& a : h.terms)
    for (const auto& b : h.terms) {
      const PauliString p = multiply(a.op, b.op);
      sq[square_strings_.insert(p)] += a.coef * b.coef * p.phase().value();
    }
  square_coefs_ = Eigen::VectorXd::Zero(square_strings_.size());
  for (auto [k, c] : sq) {
    if (std::abs(c.imag()) > 1e-10) throw std::logic_error("H^2 expansion is not Hermitian");
    square_coefs_[k] = std::abs(c.real()) > 1e-14 ? c.real() : 0.0;
  }
}

double EnergyEstimator::energy(const SiteValues& values) const {
  if (values.samples() == 0) throw std::invalid_argument("estimate_energy: empty sample set");
  return energy_coefs_.dot(energy_strings_.means(values));
}

Eigen::ArrayXd EnergyEstimator::local_energies(const SiteValues& values) const {
  Eigen::ArrayXd e = Eigen::ArrayXd::Zero(values.samples());
  for (int k = 0; k < energy_strings_.size(); ++k)
    if (energy_coefs_[k] != 0.0) e += energy_coefs_[k] * energy_strings_.sample_values(values, k);
  return e;
}

double EnergyEstimator::variance_per_site(const SiteValues& values) const {
  const double e = energy(values);
  return (square_coefs_.dot(square_strings_.means(values)) - e * e) / h_.system_size;
}

EnergyReport EnergyEstimator::report(const SiteValues& values, std::optional<double> reference_density,
                                     int chunks) const {
  EnergyReport r;
  const Eigen::ArrayXd local = local_energies(values);
  Eigen::ArrayXd square = Eigen::ArrayXd::Zero(values.samples());
  for (int k = 0; k < square_strings_.size(); ++k)
    if (square_coefs_[k] != 0.0) square += square_coefs_[k] * square_strings_.sample_values(values, k);
  const int L = h_.system_size;
  r.samples = values.samples();
  r.energy = weighted_mean(values, local);
  r.energy_stderr = error_of(values, local, chunks);
  r.energy_density = r.energy / L;
  if (reference_density) r.delta_density = r.energy_density - *reference_density;
  r.variance_per_site = (weighted_mean(values, square) - r.energy * r.energy) / L;
  // linearized per-sample contribution of <H^2> - <H>^2
  r.variance_stderr = error_of(values, square - 2.0 * r.energy * local, chunks) / L;
  r.variance_caveat = r.variance_stderr > std::abs(r.variance_per_site);
  return r;
}

nlohmann::json to_json(const EnergyReport& r) {
  nlohmann::json j;
  j["energy"] = r.energy;
  j["energy_stderr"] = r.energy_stderr;
  j["energy_density"] = r.energy_density;
  j["delta_density"] = r.delta_density ? nlohmann::json(*r.delta_density) : nlohmann::json(nullptr);
  j["variance_per_site"] = r.variance_per_site;
  j["variance_stderr"] = r.variance_stderr;
  j["variance_caveat"] = r.variance_caveat;
  j["samples"] = r.samples;
  return j;
}

nlohmann::json to_json(const CorrelatorTable& t) {
  nlohmann::json j;
  j["channel"] = std::string(1, axis_char(t.channel)) + axis_char(t.channel);
  j["values"] = t.values;
  j["stderr"] = t.stderr;
  j["translation_averaged"] = t.translation_averaged;
  return j;
}

EnergyReport estimate_energy(const OutcomeBatch& samples, const HamiltonianSpec& h) {
  return EnergyEstimator(h).report(SiteValues::from_outcomes(samples));
}

double estimate_energy_variance(const OutcomeBatch& samples, const HamiltonianSpec& h) {
  return EnergyEstimator(h).variance_per_site(SiteValues::from_outcomes(samples));
}

}  // namespace povm
