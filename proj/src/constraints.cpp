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

#include "povm/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/core.h>

#include "povm/random.hpp"

namespace povm {

std::string to_string(GramSource s) {
  switch (s) {
    case GramSource::train:
      return "train";
    case GramSource::val:
      return "val";
    case GramSource::grad:
      return "grad";
  }
  return "?";
}

GramEstimate gram_from_means(const Eigen::VectorXd& means, const GramExpansion& expansion, GramSource source,
                             int samples) {
  GramEstimate g;
  g.source = source;
  g.samples = samples;
  g.string_means = means;
  g.matrices = expansion.assemble(means);
  for (auto& m : g.matrices) {
    if (!m.allFinite()) throw std::runtime_error("build_gram: non-finite entries");
    m = (0.5 * (m + m.adjoint())).eval();
  }
  return g;
}

GramEstimate build_gram(const SiteValues& values, const GramExpansion& expansion, GramSource source) {
  if (values.samples() == 0) throw std::invalid_argument("build_gram: empty sample set");
  if (values.sites() != expansion.system_size()) throw std::invalid_argument("build_gram: system size mismatch");
  return gram_from_means(expansion.strings().means(values), expansion, source, values.samples());
}

GramEstimate build_gram(const OutcomeBatch& samples, const GramExpansion& expansion, GramSource source) {
  if (samples.empty()) throw std::invalid_argument("build_gram: empty sample set");
  return build_gram(SiteValues::from_outcomes(samples), expansion, source);
}

SplitHalves split_halves(const OutcomeBatch& samples, std::uint64_t seed) {
  const int n = samples.size();
  if (n < 2) throw std::invalid_argument("split_halves: need at least two samples");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {0x73706c6974ULL}));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform01(rng) * (i + 1));
    std::swap(order[i], order[j]);
  }
  SplitHalves out;
  out.dropped = n % 2 != 0;
  if (out.dropped) fmt::print(stderr, "warning: split_halves dropped one of {} samples\n", n);
  const int half = n / 2;
  out.train = samples.select(std::span<const int>(order.data(), half));
  out.validation = samples.select(std::span<const int>(order.data() + half, half));
  return out;
}

double percentile65(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("percentile65: empty input");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.65 * double(v.size())));
  const std::size_t k = std::max<std::size_t>(rank, 1) - 1;
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

SpectralData validate_spectrum(const GramEstimate& train, const GramEstimate& validation, const Tolerance& tol) {
  if (train.matrices.size() != validation.matrices.size())
    throw std::invalid_argument("validate_spectrum: momentum count mismatch");
  SpectralData out;
  out.momenta.resize(train.matrices.size());
  for (std::size_t m = 0; m < train.matrices.size(); ++m) {
    const Eigen::MatrixXcd& a = train.matrices[m];
    const Eigen::MatrixXcd& b = validation.matrices[m];
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("validate_spectrum: dim mismatch");
    if (!a.allFinite() || !b.allFinite()) throw std::runtime_error("validate_spectrum: non-finite Gram matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("validate_spectrum: eigensolver failed");
    MomentumSpectrum& s = out.momenta[m];
    s.lambda_tr = es.eigenvalues();
    s.vectors = es.eigenvectors();
    const Eigen::Index d = a.rows();
    s.lambda_val.resize(d);
    s.delta.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto v = s.vectors.col(k);
      s.lambda_val[k] = (v.adjoint() * b * v)(0, 0).real();
      s.delta[k] = std::abs(s.lambda_tr[k] - s.lambda_val[k]);
    }
    s.quantile = percentile65(std::span<const double>(s.delta.data(), std::size_t(d)));
    s.tau_k = std::max(tol.tau * s.quantile, kToleranceFloor);
    s.s_k = std::max(tol.s * s.quantile, kToleranceFloor);
  }
  return out;
}

SpectralData sample_spectrum(const OutcomeBatch& samples, const GramExpansion& expansion, const Tolerance& tol,
                             std::uint64_t split_seed) {
  const SplitHalves h = split_halves(samples, split_seed);
  return validate_spectrum(build_gram(h.train, expansion, GramSource::train),
                           build_gram(h.validation, expansion, GramSource::val), tol);
}

std::vector<NoiseRatio> noise_ratios(const SpectralData& spectrum) {
  std::vector<NoiseRatio> out;
  for (std::size_t m = 0; m < spectrum.momenta.size(); ++m) {
    const MomentumSpectrum& s = spectrum.momenta[m];
    const double scale = std::max(s.quantile, kToleranceFloor);
    for (Eigen::Index a = 0; a < s.lambda_tr.size(); ++a)
      out.push_back({int(m), int(a), s.lambda_tr[a], s.lambda_val[a], s.delta[a], scale, s.lambda_val[a] / scale});
  }
  return out;
}

double fermi_weight(double lambda, double tau_k, double s_k) {
  if (!(s_k > 0.0)) throw std::invalid_argument("fermi_weight: width must be positive");
  const double x = (lambda + tau_k) / s_k;
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

nlohmann::json to_json(const ConstraintReport& r) {
  nlohmann::json j;
  j["psd_loss"] = r.loss;
  j["P"] = r.violation;
  j["min_lambda_val"] = r.min_lambda_val;
  j["tau_k"] = r.tau_k;
  j["active_modes"] = r.active_modes;
  return j;
}

PsdLoss psd_weights(const SpectralData& spectrum) {
  PsdLoss out;
  for (const MomentumSpectrum& s : spectrum.momenta) {
    const Eigen::Index d = s.vectors.rows();
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index k = 0; k < s.lambda_val.size(); ++k) {
      const double f = fermi_weight(s.lambda_val[k], s.tau_k, s.s_k);
      out.report.violation = std::max(out.report.violation, f);
      if (f > 0.01) ++out.report.active_modes;
      if (f == 0.0) continue;
      const auto v = s.vectors.col(k);
      w.noalias() -= f * (v.conjugate() * v.transpose());
    }
    out.weights.push_back(std::move(w));
    out.report.min_lambda_val.push_back(s.lambda_val.size() ? s.lambda_val.minCoeff() : 0.0);
    out.report.tau_k.push_back(s.tau_k);
  }
  return out;
}

PsdLoss psd_loss(const SpectralData& spectrum, const GramEstimate& grad) {
  if (grad.matrices.size() != spectrum.momenta.size())
    throw std::invalid_argument("psd_loss: momentum count mismatch");
  PsdLoss out = psd_weights(spectrum);
  double loss = 0.0;
  for (std::size_t m = 0; m < grad.matrices.size(); ++m) {
    if (grad.matrices[m].rows() != out.weights[m].rows() || grad.matrices[m].cols() != out.weights[m].cols())
      throw std::invalid_argument("psd_loss: eigenvector and Gram dimensions differ");
    loss += out.weights[m].cwiseProduct(grad.matrices[m]).sum().real();
  }
  out.report.loss = loss;
  return out;
}

}  // namespace povm
