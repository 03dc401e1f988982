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

#include "povm/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "povm/random.hpp"

namespace povm::oracle {

namespace {

using cd = std::complex<double>;

struct PauliMasks {
  std::uint64_t flip = 0;   // X or Y
  std::uint64_t sign = 0;   // Y or Z
  cd prefactor{1.0, 0.0};   // phase * i^{#Y}
};

PauliMasks masks_of(const PauliString& p, int L) {
  PauliMasks m;
  int n_y = 0;
  for (const auto& f : p.factors()) {
    if (f.site < 0 || f.site >= L) throw std::out_of_range("Pauli factor outside the chain: " + p.to_string());
    const std::uint64_t bit = std::uint64_t(1) << f.site;
    if (f.axis == Axis::X || f.axis == Axis::Y) m.flip |= bit;
    if (f.axis == Axis::Y || f.axis == Axis::Z) m.sign |= bit;
    if (f.axis == Axis::Y) ++n_y;
  }
  m.prefactor = (p.phase() * Phase(n_y)).value();
  return m;
}

void check_sites(int L, int max, const char* what) {
  if (L < 1) throw std::invalid_argument("system size must be positive");
  if (L > max)
    throw std::invalid_argument(std::string(what) + " supports L <= " + std::to_string(max) + ", got " +
                                std::to_string(L));
}

void fix_phase(Eigen::VectorXcd& psi) {
  const double scale = psi.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    if (std::abs(psi[k]) > 1e-8 * scale) {
      psi *= std::conj(psi[k]) / std::abs(psi[k]);
      return;
    }
  }
}

// Lanczos with full reorthogonalization; returns the two lowest Ritz pairs'
// values and the lowest vector.
ExactState lanczos_ground_state(const HamiltonianSpec& h) {
  const int L = h.system_size;
  const Eigen::Index dim = Eigen::Index(1) << L;
  Rng rng(derive_seed(0x1a2c05, {std::uint64_t(L)}));
  Eigen::VectorXcd v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = cd(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  v.normalize();

  const int max_iter = 300;
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> alpha, beta;
  Eigen::VectorXd ritz;
  Eigen::MatrixXd ritz_vecs;
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    basis.push_back(v);
    Eigen::VectorXcd w = apply_hamiltonian(h, v);
    const double a = basis.back().dot(w).real();
    alpha.push_back(a);
    for (const auto& b : basis) w -= b.dot(w) * b;
    for (const auto& b : basis) w -= b.dot(w) * b;
    const double nb = w.norm();

    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      T(k, k) = alpha[k];
      if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    ritz = es.eigenvalues();
    ritz_vecs = es.eigenvectors();
    const bool converged = m > 2 && std::abs(ritz[0] - prev) < 1e-13 && std::abs(nb * ritz_vecs(m - 1, 0)) < 1e-10;
    prev = ritz[0];
    if (converged || nb < 1e-12 || m == dim) break;
    beta.push_back(nb);
    v = w / nb;
  }
  ExactState s;
  s.system_size = L;
  s.amplitudes = Eigen::VectorXcd::Zero(dim);
  for (std::size_t k = 0; k < basis.size(); ++k) s.amplitudes += ritz_vecs(Eigen::Index(k), 0) * basis[k];
  s.amplitudes.normalize();
  s.energy = s.amplitudes.dot(apply_hamiltonian(h, s.amplitudes)).real();
  s.gap = ritz.size() > 1 ? ritz[1] - ritz[0] : 0.0;
  return s;
}

// Site-by-site linear map on the base-4 digits of a tensor of length 4^L.
template <typename Scalar, typename Map>
std::vector<Scalar> transform_digits(std::vector<Scalar> in, int L, const Map& map) {
  std::vector<Scalar> out(in.size());
  std::size_t stride = 1;
  for (int j = 0; j < L; ++j, stride *= 4) {
    for (std::size_t base = 0; base < in.size(); base += 4 * stride) {
      for (std::size_t low = 0; low < stride; ++low) {
        const std::size_t k0 = base + low;
        for (int r = 0; r < 4; ++r) {
          Scalar acc{};
          for (int q = 0; q < 4; ++q) acc += map(r, q) * in[k0 + std::size_t(q) * stride];
          out[k0 + std::size_t(r) * stride] = acc;
        }
      }
    }
    std::swap(in, out);
  }
  return in;
}

// Interleaves (row bit a_j, column bit b_j) into digit q_j = a_j + 2 b_j.
std::size_t pair_index(std::size_t a, std::size_t b, int L) {
  std::size_t r = 0;
  for (int j = 0; j < L; ++j) r |= (((a >> j) & 1) | (((b >> j) & 1) << 1)) << (2 * j);
  return r;
}

}  // namespace

Eigen::VectorXcd apply_pauli(const PauliString& p, const Eigen::VectorXcd& psi, int L) {
  const PauliMasks m = masks_of(p, L);
  Eigen::VectorXcd out(psi.size());
  for (std::uint64_t b = 0; b < std::uint64_t(psi.size()); ++b) {
    const double s = (std::popcount(b & m.sign) & 1) ? -1.0 : 1.0;
    out[Eigen::Index(b ^ m.flip)] = m.prefactor * s * psi[Eigen::Index(b)];
  }
  return out;
}

Eigen::VectorXcd apply_hamiltonian(const HamiltonianSpec& h, const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (const auto& t : h.terms) out += t.coef * apply_pauli(t.op, psi, h.system_size);
  return out;
}

Eigen::MatrixXcd dense_pauli_matrix(const PauliString& p, int L) {
  check_sites(L, kMaxGroundStateSites, "dense Pauli matrix");
  const PauliMasks m = masks_of(p, L);
  const Eigen::Index dim = Eigen::Index(1) << L;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::uint64_t b = 0; b < std::uint64_t(dim); ++b) {
    const double s = (std::popcount(b & m.sign) & 1) ? -1.0 : 1.0;
    out(Eigen::Index(b ^ m.flip), Eigen::Index(b)) = m.prefactor * s;
  }
  return out;
}

Eigen::MatrixXcd dense_hamiltonian(const HamiltonianSpec& h) {
  check_sites(h.system_size, kMaxGroundStateSites, "dense Hamiltonian");
  const Eigen::Index dim = Eigen::Index(1) << h.system_size;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : h.terms) {
    const PauliMasks m = masks_of(t.op, h.system_size);
    for (std::uint64_t b = 0; b < std::uint64_t(dim); ++b) {
      const double s = (std::popcount(b & m.sign) & 1) ? -1.0 : 1.0;
      H(Eigen::Index(b ^ m.flip), Eigen::Index(b)) += t.coef * m.prefactor * s;
    }
  }
  return H;
}

ExactState ground_state(const HamiltonianSpec& h) {
  h.validate();
  const int L = h.system_size;
  check_sites(L, kMaxGroundStateSites, "ground_state");
  ExactState s;
  if (L > kMaxDenseSites) {
    s = lanczos_ground_state(h);
  } else {
    s.system_size = L;
    const Eigen::MatrixXcd H = dense_hamiltonian(h);
    if (H.imag().cwiseAbs().maxCoeff() == 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.real());
      s.amplitudes = es.eigenvectors().col(0).cast<cd>();
      s.energy = es.eigenvalues()[0];
      s.gap = H.rows() > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0] : 0.0;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
      s.amplitudes = es.eigenvectors().col(0);
      s.energy = es.eigenvalues()[0];
      s.gap = H.rows() > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0] : 0.0;
    }
  }
  s.amplitudes.normalize();
  fix_phase(s.amplitudes);
  s.degenerate = s.gap < 1e-8;
  return s;
}

std::complex<double> exact_expectation(const ExactState& state, const PauliString& p) {
  return state.amplitudes.dot(apply_pauli(p, state.amplitudes, state.system_size));
}

Eigen::VectorXd exact_string_means(const ExactState& state, const StringTable& table) {
  Eigen::VectorXd out(table.size());
  for (int k = 0; k < table.size(); ++k) out[k] = exact_expectation(state, table.string(k)).real();
  return out;
}

std::vector<double> povm_distribution(const Eigen::MatrixXcd& rho, int L) {
  check_sites(L, kMaxSamplingSites, "POVM distribution");
  const std::size_t dim = std::size_t(1) << L;
  if (std::size_t(rho.rows()) != dim || std::size_t(rho.cols()) != dim)
    throw std::invalid_argument("density matrix has the wrong dimension");
  std::vector<cd> tensor(dim * dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) tensor[pair_index(a, b, L)] = rho(Eigen::Index(a), Eigen::Index(b));

  // p_i = sum_{a,b} rho_ab (E_i)_ba
  std::array<Eigen::Matrix2cd, 4> effects;
  for (int i = 0; i < 4; ++i) effects[i] = effect_matrix(i);
  auto map = [&](int i, int q) { return effects[i](q >> 1, q & 1); };
  const auto out = transform_digits(std::move(tensor), L, map);
  std::vector<double> probs(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) probs[k] = out[k].real();
  return probs;
}

std::vector<double> exact_povm_distribution(const ExactState& state) {
  check_sites(state.system_size, kMaxDistributionSites, "exact_povm_distribution");
  const Eigen::MatrixXcd rho = state.amplitudes * state.amplitudes.adjoint();
  auto probs = povm_distribution(rho, state.system_size);
  for (double& p : probs)
    if (p < 0.0 && p > -1e-14) p = 0.0;
  return probs;
}

Eigen::MatrixXcd density_from_distribution(std::span<const double> probs, int L) {
  check_sites(L, kMaxSamplingSites, "density_from_distribution");
  const std::size_t dim = std::size_t(1) << L;
  if (probs.size() != dim * dim) throw std::invalid_argument("distribution must have 4^L entries");
  std::vector<cd> tensor(probs.begin(), probs.end());
  std::array<Eigen::Matrix2cd, 4> duals;
  for (int i = 0; i < 4; ++i) duals[i] = dual_matrix(i);
  auto map = [&](int q, int i) { return duals[i](q & 1, q >> 1); };
  const auto out = transform_digits(std::move(tensor), L, map);
  Eigen::MatrixXcd rho(dim, dim);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) rho(Eigen::Index(a), Eigen::Index(b)) = out[pair_index(a, b, L)];
  return rho;
}

OutcomeBatch all_outcomes(int L) {
  check_sites(L, kMaxDistributionSites, "all_outcomes");
  const std::size_t n = std::size_t(1) << (2 * L);
  OutcomeBatch batch(static_cast<int>(n), L);
  for (std::size_t k = 0; k < n; ++k) {
    auto row = batch.row(static_cast<int>(k));
    for (int j = 0; j < L; ++j) row[j] = static_cast<Outcome>((k >> (2 * j)) & 3);
  }
  return batch;
}

SiteValues exhaustive_site_values(std::span<const double> probs, int L) {
  SiteValues v = SiteValues::from_outcomes(all_outcomes(L));
  if (std::size_t(v.samples()) != probs.size()) throw std::invalid_argument("distribution must have 4^L entries");
  v.set_weights(Eigen::Map<const Eigen::ArrayXd>(probs.data(), Eigen::Index(probs.size())));
  return v;
}

OutcomeBatch sample_exact(const ExactState& state, int count, std::uint64_t seed) {
  const int L = state.system_size;
  check_sites(L, kMaxSamplingSites, "sample_exact");
  OutcomeBatch out(L);
  if (count <= 0) return out;

  const Eigen::MatrixXcd rho = state.amplitudes * state.amplitudes.adjoint();
  // marginals[d] holds p(i_0..i_{d-1}) indexed by sum_j i_j 4^j.
  std::vector<std::vector<double>> marginals(L + 1);
  marginals[L] = povm_distribution(rho, L);
  for (double& p : marginals[L]) p = std::max(p, 0.0);
  for (int d = L - 1; d >= 0; --d) {
    const std::size_t size = std::size_t(1) << (2 * d);
    marginals[d].assign(size, 0.0);
    for (int a = 0; a < 4; ++a)
      for (std::size_t r = 0; r < size; ++r) marginals[d][r] += marginals[d + 1][r + std::size_t(a) * size];
  }

  Rng rng(seed);
  OutcomeString s(L);
  for (int n = 0; n < count; ++n) {
    std::size_t prefix = 0;
    for (int d = 0; d < L; ++d) {
      const std::size_t stride = std::size_t(1) << (2 * d);
      std::array<double, 4> cond{};
      double total = 0.0;
      for (int a = 0; a < 4; ++a) total += cond[a] = marginals[d + 1][prefix + std::size_t(a) * stride];
      double u = uniform01(rng) * total;
      int pick = 3;
      for (int a = 0; a < 4; ++a) {
        if (u < cond[a]) {
          pick = a;
          break;
        }
        u -= cond[a];
      }
      while (pick > 0 && cond[pick] <= 0.0) --pick;
      s[d] = static_cast<Outcome>(pick);
      prefix += std::size_t(pick) * stride;
    }
    out.push_back(s);
  }
  return out;
}

ReferenceTables reference_tables(const ExactState& state) {
  ReferenceTables t;
  const int L = state.system_size;
  t.system_size = L;
  t.energy = state.energy;
  t.energy_density = state.energy / L;
  t.gap = state.gap;
  t.degenerate = state.degenerate;
  constexpr std::array<Axis, 3> axes{Axis::X, Axis::Y, Axis::Z};
  for (int c = 0; c < 3; ++c) {
    t.correlators[c].resize(L);
    for (int j = 0; j < L; ++j) {
      const PauliString p = j == 0 ? PauliString::single(0, axes[c])
                                   : PauliString({{0, axes[c]}, {j, axes[c]}});
      t.correlators[c][j] = exact_expectation(state, p).real();
    }
  }
  return t;
}

}  // namespace povm::oracle
