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
#include <random>

#include "../support/dense.hpp"
#include "povm/frame.hpp"

using namespace povm;
using Catch::Approx;

TEST_CASE("effects resolve the identity") {
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 4; ++a) sum += effect_matrix(a);
  CHECK((sum - Eigen::Matrix2cd::Identity()).norm() < 1e-15);
}

TEST_CASE("effects and duals are biorthogonal") {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const auto t = (effect_matrix(a) * dual_matrix(b)).trace();
      CHECK(std::abs(t - (a == b ? 1.0 : 0.0)) < 1e-15);
      const auto ff = (dual_matrix(a) * dual_matrix(b)).trace();
      CHECK(std::abs(ff - (a == b ? 5.0 : -1.0)) < 1e-14);
    }
}

TEST_CASE("tetrahedron geometry") {
  const auto& n = frame_vectors().n;
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  for (int a = 0; a < 4; ++a) {
    s += n[a];
    CHECK(n[a].norm() == Approx(1.0).epsilon(1e-15));
    for (int b = a + 1; b < 4; ++b) CHECK(n[a].dot(n[b]) == Approx(-1.0 / 3.0).epsilon(1e-15));
  }
  CHECK(s.norm() < 1e-15);
  CHECK(n[0].x() > 0);
  CHECK(n[0].y() > 0);
  CHECK(n[0].z() > 0);
}

TEST_CASE("dual coefficient table") {
  const auto& c = dual_coefficients();
  const double r3 = std::sqrt(3.0);
  const double expected[4][3] = {{r3, r3, r3}, {r3, -r3, -r3}, {-r3, r3, -r3}, {-r3, -r3, r3}};
  for (int a = 0; a < 4; ++a) {
    CHECK(c[a][0] == 1.0);
    for (int p = 1; p < 4; ++p) {
      CHECK(c[a][p] == Approx(expected[a][p - 1]).epsilon(1e-15));
      const auto tr = (dual_matrix(a) * pauli_matrix(Axis(p))).trace();
      CHECK(std::abs(tr - c[a][p]) < 1e-14);
    }
  }
}

TEST_CASE("index checks") {
  CHECK_THROWS_AS(effect_matrix(4), std::out_of_range);
  CHECK_THROWS_AS(dual_matrix(-1), std::out_of_range);
}

TEST_CASE("qubit reconstruction round trip") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    Eigen::Vector3d r(g(rng), g(rng), g(rng));
    r *= std::pow(std::uniform_real_distribution<double>()(rng), 1.0 / 3.0) / r.norm();
    const Eigen::Vector4d p = probs_from_state({r});
    CHECK(p.sum() == Approx(1.0).epsilon(1e-15));
    CHECK(physical_distribution(p));
    const QubitState q = reconstruct_qubit(p);
    CHECK((q.bloch - r).norm() < 1e-12);
  }
}

TEST_CASE("probability examples") {
  const Eigen::Vector4d pz = probs_from_state({Eigen::Vector3d(0, 0, 1)});
  const double hi = (1 + 1 / std::sqrt(3.0)) / 4, lo = (1 - 1 / std::sqrt(3.0)) / 4;
  CHECK(pz[0] == Approx(hi));
  CHECK(pz[1] == Approx(lo));
  CHECK(pz[2] == Approx(lo));
  CHECK(pz[3] == Approx(hi));
  const Eigen::Vector4d mixed = probs_from_state({Eigen::Vector3d::Zero()});
  CHECK((mixed.array() - 0.25).abs().maxCoeff() < 1e-16);
  CHECK_THROWS(probs_from_state({Eigen::Vector3d(0, 0, 1.1)}));
  CHECK_THROWS(reconstruct_qubit(Eigen::Vector4d(0.5, 0.5, 0.5, 0.0)));
  CHECK_THROWS(reconstruct_qubit(Eigen::Vector4d(1.2, -0.2, 0.0, 0.0)));
}

TEST_CASE("vertex distribution is unphysical") {
  const Eigen::Vector4d p(1, 0, 0, 0);
  CHECK_FALSE(physical_distribution(p));
  const QubitState q = reconstruct_qubit(p);
  CHECK(q.bloch.norm() == Approx(3.0));
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(q.density());
  CHECK(es.eigenvalues()[0] == Approx(-1.0));
  CHECK(es.eigenvalues()[1] == Approx(2.0));
}

TEST_CASE("pauli sample values") {
  const OutcomeString s{0, 1, 2, 3};
  const double r3 = std::sqrt(3.0);
  CHECK(pauli_sample_value(s, PauliString::parse("I")).real() == 1.0);
  CHECK(pauli_sample_value(s, PauliString::parse("Z0")).real() == Approx(r3));
  CHECK(pauli_sample_value(s, PauliString::parse("Z0 Z1")).real() == Approx(-3.0));
  CHECK(pauli_sample_value(s, PauliString::parse("X2 Y3")).real() == Approx(3.0));
  const auto v = pauli_sample_value(s, PauliString::parse("+i X0"));
  CHECK(v.real() == Approx(0.0).margin(1e-15));
  CHECK(v.imag() == Approx(r3));
  CHECK(variance_bound(1, 100) == Approx(0.09));
  CHECK(variance_bound(2, 81) == Approx(1.0));
}

TEST_CASE("single-qubit estimator is unbiased") {
  const QubitState q{Eigen::Vector3d(0.3, -0.4, 0.5)};
  const Eigen::Vector4d p = probs_from_state(q);
  for (int axis = 1; axis < 4; ++axis) {
    double mean = 0.0;
    for (int a = 0; a < 4; ++a) mean += p[a] * dual_coefficients()[a][axis];
    CHECK(mean == Approx(q.bloch[axis - 1]).epsilon(1e-14));
  }
}
