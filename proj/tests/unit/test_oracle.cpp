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

#include <cmath>

#include "../support/dense.hpp"
#include "povm/hamiltonian.hpp"
#include "povm/oracle.hpp"

using namespace povm;
using Catch::Approx;

namespace {

Eigen::MatrixXcd kron_hamiltonian(const HamiltonianSpec& h) {
  const int d = 1 << h.system_size;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& t : h.terms) m += t.coef * povm::testing::dense(t.op, h.system_size);
  return m;
}

}  // namespace

TEST_CASE("presets") {
  const auto t = HamiltonianSpec::tfim(4);
  CHECK(t.terms.size() == 8);
  CHECK(HamiltonianSpec::preset("GappedTFIM", 4).terms.back().coef == Approx(0.6));
  CHECK(HamiltonianSpec::preset("Heisenberg", 4).terms.size() == 12);
  CHECK_THROWS(HamiltonianSpec::preset("Potts", 4));
  const auto c = HamiltonianSpec::custom(3, {"0.5 X0 X1", "-1 Z0"}, true);
  CHECK(c.terms.size() == 6);
  CHECK_THROWS(HamiltonianSpec::custom(3, {"1 +i X0"}, false));
  CHECK_THROWS(HamiltonianSpec::custom(3, {"1 X4"}, false));
}

TEST_CASE("dense hamiltonian agrees with Kronecker construction") {
  for (const char* name : {"TFIM", "GappedTFIM", "Heisenberg"}) {
    const auto h = HamiltonianSpec::preset(name, 4);
    CHECK((oracle::dense_hamiltonian(h) - kron_hamiltonian(h)).norm() < 1e-13);
  }
  const auto p = PauliString::parse("-i X0 Y2 Z3");
  CHECK((oracle::dense_pauli_matrix(p, 4) - povm::testing::dense(p, 4)).norm() < 1e-14);
}

TEST_CASE("TFIM L=2 matches 4x4 diagonalization") {
  const auto h = HamiltonianSpec::tfim(2);
  const auto gs = oracle::ground_state(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(kron_hamiltonian(h));
  CHECK(gs.energy == Approx(es.eigenvalues()[0]).epsilon(1e-12));
  CHECK(gs.gap == Approx(es.eigenvalues()[1] - es.eigenvalues()[0]).epsilon(1e-10));
}

TEST_CASE("ground state is an eigenvector") {
  for (int L : {6, 8, 11}) {
    const auto h = HamiltonianSpec::gapped_tfim(L);
    const auto gs = oracle::ground_state(h);
    const Eigen::VectorXcd r = oracle::apply_hamiltonian(h, gs.amplitudes) - gs.energy * gs.amplitudes;
    CHECK(r.norm() < 1e-8);
    CHECK(gs.amplitudes.norm() == Approx(1.0).epsilon(1e-12));
    CHECK(gs.gap > 0.1);
  }
}

TEST_CASE("Lanczos agrees with dense at L=11") {
  const auto h = HamiltonianSpec::heisenberg(11);
  const auto gs = oracle::ground_state(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::dense_hamiltonian(h).real(), Eigen::EigenvaluesOnly);
  CHECK(gs.energy == Approx(es.eigenvalues()[0]).epsilon(1e-10));
  CHECK_THROWS(oracle::ground_state(HamiltonianSpec::tfim(13)));
}

TEST_CASE("POVM distribution and inverse") {
  const int L = 3;
  const Eigen::MatrixXcd rho = povm::testing::random_density(L, 5);
  const auto p = oracle::povm_distribution(rho, L);
  REQUIRE(p.size() == 64);
  double s = 0;
  for (double x : p) {
    s += x;
    CHECK(x >= 0.0);
  }
  CHECK(s == Approx(1.0).epsilon(1e-13));
  // independent check of one entry: Tr(rho E_{i0} x E_{i1} x E_{i2})
  const int i0 = 2, i1 = 0, i2 = 3;
  const Eigen::MatrixXcd e = povm::testing::product_operator({effect_matrix(i0), effect_matrix(i1), effect_matrix(i2)});
  CHECK(p[i0 + 4 * i1 + 16 * i2] == Approx((rho * e).trace().real()).epsilon(1e-12));
  CHECK((oracle::density_from_distribution(p, L) - rho).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("exhaustive energy equals exact energy") {
  const auto h = HamiltonianSpec::tfim(3);
  const auto gs = oracle::ground_state(h);
  const auto p = oracle::exact_povm_distribution(gs);
  const SiteValues v = oracle::exhaustive_site_values(p, 3);
  StringTable t;
  double e = 0;
  std::vector<std::uint32_t> idx;
  for (const auto& term : h.terms) idx.push_back(t.insert(term.op));
  const Eigen::VectorXd m = t.means(v);
  for (std::size_t k = 0; k < h.terms.size(); ++k) e += h.terms[k].coef * m[idx[k]];
  CHECK(e == Approx(gs.energy).epsilon(1e-12));
  const Eigen::VectorXd exact = oracle::exact_string_means(gs, t);
  CHECK((exact - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("chain-rule sampling follows the distribution") {
  const auto gs = oracle::ground_state(HamiltonianSpec::heisenberg(2));
  const auto p = oracle::exact_povm_distribution(gs);
  const int n = 200000;
  const OutcomeBatch b = oracle::sample_exact(gs, n, 3);
  std::vector<double> counts(16, 0.0);
  for (int i = 0; i < n; ++i) counts[b.at(i, 0) + 4 * b.at(i, 1)] += 1;
  for (int i = 0; i < 16; ++i) {
    const double sd = std::sqrt(p[i] * (1 - p[i]) / n);
    CHECK(std::abs(counts[i] / n - p[i]) < 5 * sd + 1e-12);
  }
  const OutcomeBatch again = oracle::sample_exact(gs, 100, 3);
  for (int i = 0; i < 100; ++i) CHECK(again.at(i, 1) == b.at(i, 1));
}

TEST_CASE("reference tables") {
  const auto h = HamiltonianSpec::custom(4, {"-1 Z0"}, true);
  const auto gs = oracle::ground_state(h);
  const auto ref = oracle::reference_tables(gs);
  CHECK(ref.energy == Approx(-4.0));
  CHECK(ref.energy_density == Approx(-1.0));
  for (double v : ref.correlators[2]) CHECK(v == Approx(1.0));
  for (double v : ref.correlators[0]) CHECK(v == Approx(0.0).margin(1e-14));
  const auto heis = oracle::reference_tables(oracle::ground_state(HamiltonianSpec::heisenberg(8)));
  CHECK(heis.correlators[0][0] == Approx(0.0).margin(1e-12));
  CHECK(heis.correlators[0][1] < 0.0);
  CHECK(heis.correlators[0][2] > 0.0);
}
