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

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>

#include "povm/constraints.hpp"
#include "povm/oracle.hpp"
#include "povm/random.hpp"

using namespace povm;
using Catch::Approx;

namespace {

OutcomeBatch numbered(int count, int length) {
  OutcomeBatch b(count, length);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < length; ++j) b.row(i)[j] = Outcome((i >> (2 * j)) & 3);
  return b;
}

std::vector<int> codes(const OutcomeBatch& b) {
  std::vector<int> out;
  for (int i = 0; i < b.size(); ++i) {
    int c = 0;
    for (int j = b.length() - 1; j >= 0; --j) c = 4 * c + int(b.at(i, j));
    out.push_back(c);
  }
  return out;
}

GramEstimate single(const Eigen::MatrixXcd& m) {
  GramEstimate g;
  g.matrices = {m};
  return g;
}

Eigen::MatrixXcd random_hermitian(int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXcd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = std::complex<double>(standard_normal(rng), standard_normal(rng));
  return (a + a.adjoint()) / 2.0;
}

}  // namespace

TEST_CASE("nearest-rank 65th percentile") {
  std::vector<double> v{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  CHECK(percentile65(v) == 7.0);  // ceil(6.5) = 7th smallest
  std::vector<double> one{0.25};
  CHECK(percentile65(one) == 0.25);
  std::vector<double> three{3, 1, 2};
  CHECK(percentile65(three) == 2.0);  // ceil(1.95) = 2
  std::vector<double> twenty(20);
  std::iota(twenty.begin(), twenty.end(), 1.0);
  CHECK(percentile65(twenty) == 13.0);
}

TEST_CASE("split halves") {
  SECTION("even count keeps everything") {
    const OutcomeBatch b = numbered(1000, 5);
    const SplitHalves h = split_halves(b, 3);
    CHECK(h.train.size() == 500);
    CHECK(h.validation.size() == 500);
    CHECK_FALSE(h.dropped);
    std::vector<int> all = codes(h.train), val = codes(h.validation);
    all.insert(all.end(), val.begin(), val.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expected = codes(b);
    std::sort(expected.begin(), expected.end());
    CHECK(all == expected);
  }
  SECTION("two samples") {
    const SplitHalves h = split_halves(numbered(2, 3), 1);
    CHECK(h.train.size() == 1);
    CHECK(h.validation.size() == 1);
  }
  SECTION("odd count drops one") {
    const SplitHalves h = split_halves(numbered(7, 3), 1);
    CHECK(h.train.size() == 3);
    CHECK(h.validation.size() == 3);
    CHECK(h.dropped);
  }
  SECTION("seeded") {
    const OutcomeBatch b = numbered(64, 4);
    CHECK(codes(split_halves(b, 9).train) == codes(split_halves(b, 9).train));
    CHECK(codes(split_halves(b, 9).train) != codes(split_halves(b, 10).train));
  }
}

TEST_CASE("validate spectrum identities") {
  const Eigen::MatrixXcd a = random_hermitian(6, 2);
  SECTION("identical halves") {
    const SpectralData s = validate_spectrum(single(a), single(a), Tolerance{});
    const MomentumSpectrum& m = s.momenta[0];
    CHECK((m.lambda_val - m.lambda_tr).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(m.delta.maxCoeff() < 1e-10);
    CHECK(m.tau_k == kToleranceFloor);
    CHECK(m.s_k == kToleranceFloor);
  }
  SECTION("diagonal shift") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
    d.diagonal() << 1.0, 2.0, 3.0, 4.0;
    const double delta = 0.125;
    Eigen::MatrixXcd shifted = d;
    shifted.diagonal().array() += delta;
    const SpectralData s = validate_spectrum(single(d), single(shifted), Tolerance{2.0, 0.5});
    const MomentumSpectrum& m = s.momenta[0];
    for (int k = 0; k < 4; ++k) CHECK(m.delta[k] == Approx(delta).margin(1e-14));
    CHECK(m.quantile == Approx(delta));
    CHECK(m.tau_k == Approx(2.0 * delta));
    CHECK(m.s_k == Approx(0.5 * delta));
  }
  SECTION("ascending and orthonormal") {
    const SpectralData s = validate_spectrum(single(a), single(random_hermitian(6, 3)), Tolerance{});
    const MomentumSpectrum& m = s.momenta[0];
    for (int k = 1; k < 6; ++k) CHECK(m.lambda_tr[k] >= m.lambda_tr[k - 1]);
    CHECK((m.vectors.adjoint() * m.vectors - Eigen::MatrixXcd::Identity(6, 6)).norm() < 1e-12);
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(validate_spectrum(single(a), single(random_hermitian(5, 1)), Tolerance{}), std::invalid_argument);
  }
}

TEST_CASE("fermi weight") {
  CHECK(fermi_weight(-0.3, 0.3, 0.1) == Approx(0.5));
  CHECK(fermi_weight(40.0 - 1.0, 1.0, 1.0) < 1e-17);
  CHECK(fermi_weight(-41.0, 1.0, 1.0) == Approx(1.0).margin(1e-15));
  CHECK(fermi_weight(1e6, 0.0, 1e-8) == 0.0);
  CHECK(fermi_weight(-1e6, 0.0, 1e-8) == 1.0);
  CHECK(std::isfinite(fermi_weight(-1e300, 1.0, 1e-300)));
  double prev = 2.0;
  for (double l = -5.0; l <= 5.0; l += 0.25) {
    const double f = fermi_weight(l, 1.0, 0.7);
    CHECK(f < prev);
    prev = f;
  }
  CHECK_THROWS_AS(fermi_weight(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fermi_weight(0.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("psd loss and weights") {
  SECTION("comfortably positive spectrum") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(3, 3) * 50.0;
    Eigen::MatrixXcd v = d;
    v(0, 0) += 0.5;
    const SpectralData s = validate_spectrum(single(d), single(v), Tolerance{});
    const PsdLoss l = psd_loss(s, single(d));
    CHECK(l.report.loss == 0.0);
    CHECK(l.report.violation < 1e-17);
    CHECK(l.report.active_modes == 0);
  }
  SECTION("single violating mode gives -v v^dag") {
    Eigen::MatrixXcd tr = Eigen::MatrixXcd::Zero(2, 2);
    tr.diagonal() << -100.0, 100.0;
    Eigen::MatrixXcd va = tr;
    va(1, 1) += 1.0;  // delta = {0, 1}, P65 = 1
    const SpectralData s = validate_spectrum(single(tr), single(va), Tolerance{1.0, 1.0});
    const PsdLoss l = psd_weights(s);
    CHECK(l.report.violation == Approx(1.0));
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(2, 2);
    expected(0, 0) = -1.0;
    CHECK((l.weights[0] - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("loss matches Rayleigh quotients and is linear in M_grad") {
    const Eigen::MatrixXcd tr = random_hermitian(5, 11), va = random_hermitian(5, 12);
    const SpectralData s = validate_spectrum(single(tr), single(va), Tolerance{1.0, 1.0});
    const Eigen::MatrixXcd grad = random_hermitian(5, 13);
    const PsdLoss l = psd_loss(s, single(grad));
    const MomentumSpectrum& m = s.momenta[0];
    double expected = 0.0, p = 0.0;
    for (int k = 0; k < 5; ++k) {
      // direct evaluation, independent of the weight matrix
      const double f = 1.0 / (1.0 + std::exp((m.lambda_val[k] + m.tau_k) / m.s_k));
      expected -= f * (m.vectors.col(k).adjoint() * grad * m.vectors.col(k))(0, 0).real();
      p = std::max(p, f);
    }
    CHECK(l.report.loss == Approx(expected).epsilon(1e-12));
    CHECK(l.report.violation == Approx(p).epsilon(1e-12));
    // finite difference on one Hermitian perturbation direction
    const Eigen::MatrixXcd dir = random_hermitian(5, 14);
    const double h = 1e-6;
    const double fd = (psd_loss(s, single(grad + h * dir)).report.loss - psd_loss(s, single(grad - h * dir)).report.loss) / (2 * h);
    CHECK(fd == Approx(l.weights[0].cwiseProduct(dir).sum().real()).epsilon(1e-7));
  }
  SECTION("P is the maximum over momenta") {
    GramEstimate tr, va;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(2, 2), b = a;
    b(0, 0) = -0.5;
    tr.matrices = {a, b};
    va.matrices = {a * 1.1, b * 1.1};
    const SpectralData s = validate_spectrum(tr, va, Tolerance{1.0, 1.0});
    double p = 0.0;
    for (const auto& m : s.momenta)
      for (int k = 0; k < 2; ++k) p = std::max(p, fermi_weight(m.lambda_val[k], m.tau_k, m.s_k));
    CHECK(psd_weights(s).report.violation == p);
    CHECK(psd_weights(s).report.min_lambda_val.size() == 2);
  }
  SECTION("mismatched momentum count") {
    const SpectralData s = validate_spectrum(single(random_hermitian(3, 1)), single(random_hermitian(3, 2)), Tolerance{});
    GramEstimate g;
    g.matrices = {random_hermitian(3, 3), random_hermitian(3, 4)};
    CHECK_THROWS_AS(psd_loss(s, g), std::invalid_argument);
  }
}

TEST_CASE("sampled Gram estimates are unbiased and calibrated") {
  const HamiltonianSpec h = HamiltonianSpec::gapped_tfim(4);
  const oracle::ExactState gs = oracle::ground_state(h);
  const auto g = cached_gram_expansion(generate_templates(2, 2), 4);
  const Eigen::VectorXd exact = oracle::exact_string_means(gs, g->strings());

  SECTION("mean of sampled matrices approaches the exact Gram") {
    const OutcomeBatch samples = oracle::sample_exact(gs, 200000, 5);
    const GramEstimate est = build_gram(samples, *g, GramSource::train);
    double worst = 0.0;
    for (int m = 0; m < 4; ++m) worst = std::max(worst, (est.matrices[m] - g->assemble(m, exact)).cwiseAbs().maxCoeff());
    // weight-4 products have per-sample spread up to 81; 200k samples bound the error well below 0.2
    CHECK(worst < 0.2);
    for (const auto& m : est.matrices) CHECK((m - m.adjoint()).norm() == 0.0);
  }

  SECTION("noise scale shrinks like one over root N") {
    std::vector<double> small, large;
    for (int rep = 0; rep < 12; ++rep) {
      auto median_delta = [&](int n, std::uint64_t seed) {
        const SpectralData s = sample_spectrum(oracle::sample_exact(gs, n, seed), *g, Tolerance{}, seed + 1);
        std::vector<double> d;
        for (const auto& m : s.momenta) d.insert(d.end(), m.delta.data(), m.delta.data() + m.delta.size());
        std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
        return d[d.size() / 2];
      };
      small.push_back(median_delta(8000, 100 + rep));
      large.push_back(median_delta(32000, 200 + rep));
    }
    const double ratio = std::accumulate(large.begin(), large.end(), 0.0) / std::accumulate(small.begin(), small.end(), 0.0);
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.7);
  }

  SECTION("noise ratios use the per-momentum scale") {
    const SpectralData s = sample_spectrum(oracle::sample_exact(gs, 20000, 8), *g, Tolerance{}, 9);
    const auto r = noise_ratios(s);
    CHECK(r.size() == std::size_t(4 * g->dim()));
    for (const auto& n : r) {
      CHECK(n.scale == s.momenta[n.momentum].quantile);
      CHECK(n.ratio == Approx(n.lambda_val / n.scale));
    }
  }
}

TEST_CASE("strictly positive Gram gives negligible violation") {
  // maximally mixed state: every template squares to the identity and
  // distinct strings have zero mean, so M = I at each momentum
  const int L = 4;
  const auto g = cached_gram_expansion(generate_templates(2, 2), L);
  Eigen::VectorXd means = Eigen::VectorXd::Zero(g->strings().size());
  for (int k = 0; k < g->strings().size(); ++k)
    if (g->strings().string(k).is_identity()) means[k] = 1.0;
  const GramEstimate exact = gram_from_means(means, *g, GramSource::train, 0);
  for (const auto& m : exact.matrices) CHECK((m - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).norm() < 1e-12);
  GramEstimate noisy = exact;
  for (auto& m : noisy.matrices) m.diagonal().array() += 0.01;
  const SpectralData s = validate_spectrum(exact, noisy, Tolerance{1.0, 1.0});
  CHECK(psd_weights(s).report.violation < 1e-40);
}
