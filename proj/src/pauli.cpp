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

#include "povm/pauli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "povm/observables.hpp"

namespace povm {

char axis_char(Axis a) {
  switch (a) {
    case Axis::I: return 'I';
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  throw std::logic_error("unreachable axis");
}

Axis axis_from_char(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'I': return Axis::I;
    case 'X': return Axis::X;
    case 'Y': return Axis::Y;
    case 'Z': return Axis::Z;
  }
  throw std::invalid_argument(std::string("not a Pauli axis: ") + c);
}

std::complex<double> Phase::value() const {
  switch (k_) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

namespace {

// sigma_a sigma_b = phase * sigma_c
std::pair<Phase, Axis> multiply_axes(Axis a, Axis b) {
  if (a == Axis::I) return {Phase::one(), b};
  if (b == Axis::I) return {Phase::one(), a};
  if (a == b) return {Phase::one(), Axis::I};
  const int ia = static_cast<int>(a), ib = static_cast<int>(b);
  const auto c = static_cast<Axis>(6 - ia - ib);
  // X->Y->Z->X is the positive cycle.
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {cyclic ? Phase::i() : Phase::minus_i(), c};
}

void normalize(std::vector<PauliFactor>& factors, Phase& phase) {
  std::stable_sort(factors.begin(), factors.end(),
                   [](const PauliFactor& a, const PauliFactor& b) { return a.site < b.site; });
  std::vector<PauliFactor> out;
  out.reserve(factors.size());
  for (const auto& f : factors) {
    if (!out.empty() && out.back().site == f.site) {
      auto [ph, ax] = multiply_axes(out.back().axis, f.axis);
      phase = phase * ph;
      out.back().axis = ax;
    } else {
      out.push_back(f);
    }
    if (out.back().axis == Axis::I) out.pop_back();
  }
  factors = std::move(out);
}

}  // namespace

PauliString::PauliString(std::initializer_list<PauliFactor> factors, Phase phase)
    : PauliString(std::vector<PauliFactor>(factors), phase) {}

PauliString::PauliString(std::vector<PauliFactor> factors, Phase phase)
    : factors_(std::move(factors)), phase_(phase) {
  normalize(factors_, phase_);
}

PauliString PauliString::single(int site, Axis axis) { return PauliString({PauliFactor{site, axis}}); }

PauliString PauliString::parse(std::string_view text) {
  Phase phase;
  std::vector<PauliFactor> factors;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip_ws();
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    if (text[pos] == '-') phase = Phase::minus_one();
    ++pos;
    skip_ws();
    if (pos < text.size() && text[pos] == 'i') {
      phase = phase * Phase::i();
      ++pos;
    }
  }
  while (true) {
    skip_ws();
    if (pos >= text.size()) break;
    const Axis a = axis_from_char(text[pos++]);
    if (a == Axis::I && (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))) continue;
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw std::invalid_argument("missing site index in Pauli string: " + std::string(text));
    const int site = std::stoi(std::string(text.substr(start, pos - start)));
    factors.push_back({site, a});
  }
  return PauliString(std::move(factors), phase);
}

int PauliString::range() const {
  if (factors_.empty()) return 0;
  return factors_.back().site - factors_.front().site + 1;
}

Axis PauliString::at(int site) const {
  for (const auto& f : factors_)
    if (f.site == site) return f.axis;
  return Axis::I;
}

PauliString PauliString::without_phase() const {
  PauliString p = *this;
  p.phase_ = Phase::one();
  return p;
}

PauliString PauliString::with_phase(Phase ph) const {
  PauliString p = *this;
  p.phase_ = ph;
  return p;
}

std::string PauliString::to_string() const {
  std::string out;
  switch (phase_.exponent()) {
    case 1: out = "+i "; break;
    case 2: out = "-"; break;
    case 3: out = "-i "; break;
    default: break;
  }
  if (factors_.empty()) return out + "I";
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (k) out += ' ';
    out += axis_char(factors_[k].axis);
    out += std::to_string(factors_[k].site);
  }
  return out;
}

bool operator<(const PauliString& a, const PauliString& b) {
  if (a.factors_ != b.factors_) return a.factors_ < b.factors_;
  return a.phase_.exponent() < b.phase_.exponent();
}

PauliString multiply(const PauliString& p, const PauliString& q) {
  std::vector<PauliFactor> factors;
  factors.reserve(p.factors().size() + q.factors().size());
  factors.insert(factors.end(), p.factors().begin(), p.factors().end());
  factors.insert(factors.end(), q.factors().begin(), q.factors().end());
  // stable_sort keeps p's factor before q's on a shared site.
  return PauliString(std::move(factors), p.phase() * q.phase());
}

PauliString translate(const PauliString& p, int offset, int system_size) {
  if (system_size <= 0) throw std::invalid_argument("system size must be positive");
  std::vector<PauliFactor> factors;
  factors.reserve(p.factors().size());
  for (const auto& f : p.factors()) {
    const int site = ((f.site + offset) % system_size + system_size) % system_size;
    factors.push_back({site, f.axis});
  }
  return PauliString(std::move(factors), p.phase());
}

PauliString adjoint(const PauliString& p) { return p.with_phase(p.phase().conj()); }

TemplatePool generate_templates(int max_weight, int max_range) {
  if (max_weight < 1 || max_weight > 2)
    throw std::invalid_argument("template weight must be 1 or 2, got " + std::to_string(max_weight));
  if (max_range < 1) throw std::invalid_argument("template range must be >= 1");
  if (max_weight == 2 && max_range < 2) throw std::invalid_argument("weight-2 templates need range >= 2");

  constexpr std::array<Axis, 3> axes{Axis::X, Axis::Y, Axis::Z};
  TemplatePool pool;
  pool.max_weight = max_weight;
  pool.max_range = max_range;
  for (Axis a : axes) pool.templates.push_back(PauliString::single(0, a));
  if (max_weight == 2) {
    for (int d = 1; d < max_range; ++d)
      for (Axis a : axes)
        for (Axis b : axes) pool.templates.push_back(PauliString({{0, a}, {d, b}}));
  }
  return pool;
}

GramExpansion::GramExpansion(const TemplatePool& pool, int system_size)
    : system_size_(system_size), dim_(pool.size()), strings_(std::make_shared<StringTable>()) {
  if (system_size < 1) throw std::invalid_argument("system size must be positive");
  if (pool.max_range > system_size)
    throw std::invalid_argument("template range exceeds system size");
  for (const auto& t : pool.templates)
    if (t.phase() != Phase::one()) throw std::invalid_argument("templates must carry phase +1");

  const int L = system_size_;
  const int D = dim_;
  // translated[i * L + x] = T_x(O_i)
  std::vector<PauliString> translated;
  translated.reserve(std::size_t(D) * L);
  for (int i = 0; i < D; ++i)
    for (int x = 0; x < L; ++x) translated.push_back(translate(pool.templates[i], x, L));

  // Products T_x(O_i) T_y(O_j): phase and string index, shared across momenta.
  const std::size_t n_ops = translated.size();
  std::vector<std::pair<std::complex<double>, std::uint32_t>> products(n_ops * n_ops);
  for (std::size_t a = 0; a < n_ops; ++a) {
    for (std::size_t b = 0; b < n_ops; ++b) {
      const PauliString prod = multiply(translated[a], translated[b]);
      products[a * n_ops + b] = {prod.phase().value(), strings_->insert(prod)};
    }
  }

  starts_.reserve(std::size_t(L) * D * D + 1);
  std::vector<std::complex<double>> twiddle(L);
  std::map<std::uint32_t, std::complex<double>> merged;
  for (int m = 0; m < L; ++m) {
    for (int d = 0; d < L; ++d) twiddle[d] = std::polar(1.0 / L, 2.0 * std::numbers::pi * m * d / L);
    for (int i = 0; i < D; ++i) {
      for (int j = 0; j < D; ++j) {
        merged.clear();
        for (int x = 0; x < L; ++x) {
          for (int y = 0; y < L; ++y) {
            const auto& [ph, k] = products[std::size_t(i * L + x) * n_ops + std::size_t(j * L + y)];
            merged[k] += twiddle[((y - x) % L + L) % L] * ph;
          }
        }
        starts_.push_back(terms_.size());
        for (const auto& [k, c] : merged)
          if (std::abs(c) > 1e-14) terms_.push_back({c, k});
      }
    }
  }
  starts_.push_back(terms_.size());
}

double GramExpansion::momentum(int m) const { return 2.0 * std::numbers::pi * m / system_size_; }

std::size_t GramExpansion::offset(int m, int i, int j) const {
  return (std::size_t(m) * dim_ + i) * dim_ + j;
}

std::span<const GramTerm> GramExpansion::entry(int m, int i, int j) const {
  const std::size_t o = offset(m, i, j);
  return {terms_.data() + starts_[o], starts_[o + 1] - starts_[o]};
}

Eigen::MatrixXcd GramExpansion::assemble(int m, const Eigen::VectorXd& string_means) const {
  if (string_means.size() != strings_->size()) throw std::invalid_argument("string mean count mismatch");
  Eigen::MatrixXcd M(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      std::complex<double> acc = 0.0;
      for (const auto& t : entry(m, i, j)) acc += t.coef * string_means[t.string];
      M(i, j) = acc;
    }
  }
  return M;
}

std::vector<Eigen::MatrixXcd> GramExpansion::assemble(const Eigen::VectorXd& string_means) const {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(system_size_);
  for (int m = 0; m < system_size_; ++m) out.push_back(assemble(m, string_means));
  return out;
}

void GramExpansion::pullback(std::span<const Eigen::MatrixXcd> weights, Eigen::VectorXd& d_means) const {
  if (static_cast<int>(weights.size()) != system_size_)
    throw std::invalid_argument("need one weight matrix per momentum");
  if (d_means.size() != strings_->size()) d_means = Eigen::VectorXd::Zero(strings_->size());
  for (int m = 0; m < system_size_; ++m) {
    const auto& W = weights[m];
    if (W.rows() != dim_ || W.cols() != dim_) throw std::invalid_argument("weight matrix has wrong shape");
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        const std::complex<double> w = W(i, j);
        if (w == 0.0) continue;
        for (const auto& t : entry(m, i, j)) d_means[t.string] += (w * t.coef).real();
      }
  }
}

std::shared_ptr<const GramExpansion> cached_gram_expansion(const TemplatePool& pool, int system_size) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const GramExpansion>> cache;
  const auto key = std::make_tuple(pool.max_weight, pool.max_range, system_size);
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end() && it->second->dim() == pool.size()) return it->second;
  auto expansion = std::make_shared<const GramExpansion>(pool, system_size);
  cache[key] = expansion;
  return expansion;
}

}  // namespace povm
