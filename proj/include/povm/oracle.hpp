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
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "povm/frame.hpp"
#include "povm/hamiltonian.hpp"
#include "povm/observables.hpp"
#include "povm/pauli.hpp"

// Exact-diagonalization reference for small periodic chains. Basis convention:
// site j is bit j of the computational index and Z|0> = +|0>.
namespace povm::oracle {

inline constexpr int kMaxGroundStateSites = 12;
inline constexpr int kMaxDenseSites = 10;
inline constexpr int kMaxDistributionSites = 8;
inline constexpr int kMaxSamplingSites = 10;

struct ExactState {
  int system_size = 0;
  Eigen::VectorXcd amplitudes;
  double energy = 0.0;
  /// E_1 - E_0 of the solver's two lowest eigenvalues.
  double gap = 0.0;
  bool degenerate = false;
};

/// psi -> P psi.
Eigen::VectorXcd apply_pauli(const PauliString& p, const Eigen::VectorXcd& psi, int system_size);
Eigen::VectorXcd apply_hamiltonian(const HamiltonianSpec& h, const Eigen::VectorXcd& psi);
Eigen::MatrixXcd dense_pauli_matrix(const PauliString& p, int system_size);
Eigen::MatrixXcd dense_hamiltonian(const HamiltonianSpec& h);

/// Lowest eigenpair; dense for L <= 10 and Lanczos for L = 11, 12. The global
/// phase makes the first non-negligible amplitude real and positive.
ExactState ground_state(const HamiltonianSpec& h);

/// <psi|P|psi>
std::complex<double> exact_expectation(const ExactState& state, const PauliString& p);
/// Exact <P_k> for every string of the table.
Eigen::VectorXd exact_string_means(const ExactState& state, const StringTable& table);

/// p_i = Tr(rho E_{i_0} x ... x E_{i_{L-1}}) indexed by i = sum_j i_j 4^j.
std::vector<double> povm_distribution(const Eigen::MatrixXcd& rho, int system_size);
/// Table for a pure state, L <= 8. Entries in (-1e-14, 0) are clamped to 0.
std::vector<double> exact_povm_distribution(const ExactState& state);
/// sum_i p_i F_i as a dense 2^L x 2^L matrix.
Eigen::MatrixXcd density_from_distribution(std::span<const double> probs, int system_size);

/// Every outcome string of length L in table order, 4^L rows.
OutcomeBatch all_outcomes(int system_size);
/// Exhaustive weighted site values: every outcome string weighted by p_i.
SiteValues exhaustive_site_values(std::span<const double> probs, int system_size);

/// Chain-rule sampling of POVM outcomes from the exact state, L <= 10.
OutcomeBatch sample_exact(const ExactState& state, int count, std::uint64_t seed);

/// Reference observables: v[0] = <P_0>, v[j] = <P_0 P_j> for P in X, Y, Z.
struct ReferenceTables {
  int system_size = 0;
  double energy = 0.0;
  double energy_density = 0.0;
  double gap = 0.0;
  bool degenerate = false;
  std::array<std::vector<double>, 3> correlators;
};

ReferenceTables reference_tables(const ExactState& state);

}  // namespace povm::oracle
