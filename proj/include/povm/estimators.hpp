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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "povm/frame.hpp"
#include "povm/hamiltonian.hpp"
#include "povm/observables.hpp"

namespace povm {

/// Standard error of the chunk means divided by sqrt(n_chunks). Samples are
/// split into contiguous chunks of near-equal size.
double chunked_stderr(const Eigen::ArrayXd& values, int n_chunks);

inline constexpr int kDefaultChunks = 20;

struct CorrelatorTable {
  Axis channel = Axis::X;
  /// v[0] = <P_0>, v[j] = <P_0 P_j>
  std::vector<double> values;
  std::vector<double> stderr;
  bool translation_averaged = false;
};

/// `chunks` only affects the error bars; exhaustively weighted site values
/// report zero error.
CorrelatorTable estimate_correlators(const SiteValues& values, Axis channel, bool translation_average = false,
                                     int chunks = kDefaultChunks);

struct EnergyReport {
  double energy = 0.0;
  double energy_stderr = 0.0;
  double energy_density = 0.0;
  std::optional<double> delta_density;  // vs reference
  double variance_per_site = 0.0;
  double variance_stderr = 0.0;
  /// Raised when the error of the variance exceeds its magnitude.
  bool variance_caveat = false;
  long long samples = 0;
};

nlohmann::json to_json(const EnergyReport& r);
nlohmann::json to_json(const CorrelatorTable& t);

/// Energy and H^2 expansions of one Hamiltonian, built once.
class EnergyEstimator {
 public:
  explicit EnergyEstimator(const HamiltonianSpec& h);

  const HamiltonianSpec& hamiltonian() const { return h_; }
  const StringTable& strings() const { return energy_strings_; }
  /// dE/d(string means): coefficient per string of `strings()`.
  const Eigen::VectorXd& coefficients() const { return energy_coefs_; }
  const StringTable& square_strings() const { return square_strings_; }
  const Eigen::VectorXd& square_coefficients() const { return square_coefs_; }

  double energy(const SiteValues& values) const;
  /// Per-sample local energies sum_j h_j Tr[F_s P_j].
  Eigen::ArrayXd local_energies(const SiteValues& values) const;
  /// (<H^2> - <H>^2) / L; may be negative.
  double variance_per_site(const SiteValues& values) const;

  EnergyReport report(const SiteValues& values, std::optional<double> reference_density = std::nullopt,
                      int chunks = kDefaultChunks) const;

 private:
  HamiltonianSpec h_;
  StringTable energy_strings_;
  Eigen::VectorXd energy_coefs_;
  StringTable square_strings_;
  Eigen::VectorXd square_coefs_;
};

EnergyReport estimate_energy(const OutcomeBatch& samples, const HamiltonianSpec& h);
double estimate_energy_variance(const OutcomeBatch& samples, const HamiltonianSpec& h);

}  // namespace povm
