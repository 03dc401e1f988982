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
#include "povm/estimators.hpp"
#include "povm/oracle.hpp"
#include "povm/random.hpp"

using namespace povm;
using Catch::Approx;

namespace {

Eigen::MatrixXcd dense_h(const HamiltonianSpec& h) {
  const int dim = 1 << h.system_size;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : h.terms) m += t.coef * testing::dense(t.op, h.system_size);
  return m;
}

}  // namespace

TEST_CASE("chunked standard error") {
  Eigen::ArrayXd constant = Eigen::ArrayXd::Constant(100, 2.5);
  CHECK(chunked_stderr(constant, 10) == 0.0);

  Eigen::ArrayXd v(12);
  v << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  // chunks of three: means 2, 5, 8, 11; sample std = sqrt(15); error = sqrt(15) / 2
  CHECK(chunked_stderr(v, 4) == Approx(std::sqrt(15.0) / 2.0));

  Rng rng(4);
  Eigen::ArrayXd g(200000);
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = standard_normal(rng);
  // iid unit normals: error of the mean is 1 / sqrt(N)
  CHECK(chunked_stderr(g, 20) == Approx(1.0 / std::sqrt(200000.0)).epsilon(0.5));
}

TEST_CASE("exhaustive energy and variance match dense algebra") {
  for (const char* name : {"TFIM", "GappedTFIM", "Heisenberg"}) {
    const int L = 4;
    const HamiltonianSpec h = HamiltonianSpec::preset(name, L);
    const Eigen::MatrixXcd H = dense_h(h);
    const Eigen::MatrixXcd rho = testing::random_density(L, 21);
    const auto probs = oracle::povm_distribution(rho, L);
    const SiteValues v = oracle::exhaustive_site_values(probs, L);
    const EnergyEstimator est(h);
    const double e = (rho * H).trace().real();
    const double e2 = (rho * H * H).trace().real();
    CAPTURE(name);
    CHECK(est.energy(v) == Approx(e).margin(1e-10));
    CHECK(est.variance_per_site(v) == Approx((e2 - e * e) / L).margin(1e-10));
    const EnergyReport r = est.report(v, -1.0);
    CHECK(r.energy_stderr == 0.0);
    CHECK(r.energy_density == Approx(e / L).margin(1e-12));
    CHECK(*r.delta_density == Approx(e / L + 1.0).margin(1e-12));
  }
}

TEST_CASE("exact eigenstates have zero variance") {
  const HamiltonianSpec h = HamiltonianSpec::gapped_tfim(6);
  const oracle::ExactState gs = oracle::ground_state(h);
  const SiteValues v = oracle::exhaustive_site_values(oracle::exact_povm_distribution(gs), 6);
  const EnergyEstimator est(h);
  CHECK(est.energy(v) == Approx(gs.energy).margin(1e-10));
  CHECK(std::abs(est.variance_per_site(v)) < 1e-9);
}

TEST_CASE("sampled energy is consistent with its error bar") {
  const HamiltonianSpec h = HamiltonianSpec::tfim(6);
  const oracle::ExactState gs = oracle::ground_state(h);
  const OutcomeBatch s = oracle::sample_exact(gs, 100000, 17);
  const EnergyReport r = estimate_energy(s, h);
  CHECK(r.samples == 100000);
  CHECK(r.energy_stderr > 0.0);
  CHECK(std::abs(r.energy - gs.energy) < 5.0 * r.energy_stderr);
  // the local energy is a sum of 12 terms bounded by 0.3 * 9, so the per-sample spread is below 33
  CHECK(r.energy_stderr < 33.0 / std::sqrt(100000.0));
  const double var = estimate_energy_variance(s, h);
  CHECK(std::abs(var) < 10.0 * r.variance_stderr + 1e-3);
}

TEST_CASE("local energies average to the energy") {
  const HamiltonianSpec h = HamiltonianSpec::heisenberg(4);
  const oracle::ExactState gs = oracle::ground_state(h);
  const SiteValues v = SiteValues::from_outcomes(oracle::sample_exact(gs, 5000, 3));
  const EnergyEstimator est(h);
  CHECK(est.local_energies(v).mean() == Approx(est.energy(v)).margin(1e-10));
}

TEST_CASE("correlators match the oracle tables") {
  const HamiltonianSpec h = HamiltonianSpec::gapped_tfim(6);
  const oracle::ExactState gs = oracle::ground_state(h);
  const oracle::ReferenceTables ref = oracle::reference_tables(gs);
  const SiteValues v = oracle::exhaustive_site_values(oracle::exact_povm_distribution(gs), 6);
  for (int c = 0; c < 3; ++c) {
    const Axis a = Axis(c + 1);
    const CorrelatorTable t = estimate_correlators(v, a);
    const CorrelatorTable avg = estimate_correlators(v, a, true);
    REQUIRE(t.values.size() == 6);
    CHECK(avg.translation_averaged);
    for (int j = 0; j < 6; ++j) {
      CHECK(t.values[j] == Approx(ref.correlators[c][j]).margin(1e-10));
      CHECK(avg.values[j] == Approx(ref.correlators[c][j]).margin(1e-10));
      CHECK(t.stderr[j] == 0.0);
    }
  }
}

TEST_CASE("correlators on a product state") {
  // all sites in outcome 0: every P value is 3 n0[P] = sqrt(3)
  OutcomeBatch b(10, 4);
  const SiteValues v = SiteValues::from_outcomes(b);
  const CorrelatorTable t = estimate_correlators(v, Axis::Z);
  CHECK(t.values[0] == Approx(std::sqrt(3.0)));
  for (int j = 1; j < 4; ++j) CHECK(t.values[j] == Approx(3.0));
  for (double e : t.stderr) CHECK(e == Approx(0.0).margin(1e-12));
}

TEST_CASE("energy report json") {
  EnergyReport r;
  r.energy = -1.0;
  r.samples = 7;
  const auto j = to_json(r);
  CHECK(j["energy"] == -1.0);
  CHECK(j["delta_density"].is_null());
  CHECK(j["samples"] == 7);
}
