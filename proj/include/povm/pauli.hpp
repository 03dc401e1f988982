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

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace povm {

enum class Axis : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char axis_char(Axis a);
Axis axis_from_char(char c);

/// A power of the imaginary unit, i^k.
class Phase {
 public:
  constexpr Phase() = default;
  constexpr explicit Phase(int k) : k_(static_cast<std::uint8_t>(((k % 4) + 4) % 4)) {}

  static constexpr Phase one() { return Phase(0); }
  static constexpr Phase i() { return Phase(1); }
  static constexpr Phase minus_one() { return Phase(2); }
  static constexpr Phase minus_i() { return Phase(3); }

  constexpr int exponent() const { return k_; }
  constexpr bool is_real() const { return (k_ & 1) == 0; }
  constexpr Phase conj() const { return Phase(4 - k_); }
  std::complex<double> value() const;

  friend constexpr Phase operator*(Phase a, Phase b) { return Phase(a.k_ + b.k_); }
  friend constexpr bool operator==(Phase a, Phase b) = default;

 private:
  std::uint8_t k_ = 0;
};

struct PauliFactor {
  int site = 0;
  Axis axis = Axis::I;

  friend auto operator<=>(const PauliFactor&, const PauliFactor&) = default;
};

/// Sparse Pauli operator: a phase times a tensor product of X/Y/Z on a sorted
/// set of sites. Identity factors are never stored.
class PauliString {
 public:
  PauliString() = default;
  PauliString(std::initializer_list<PauliFactor> factors, Phase phase = {});
  PauliString(std::vector<PauliFactor> factors, Phase phase = {});

  static PauliString single(int site, Axis axis);
  /// Parses "X0 Z3", "-Y2", "+i X0 X1" or "I".
  static PauliString parse(std::string_view text);

  std::span<const PauliFactor> factors() const { return factors_; }
  Phase phase() const { return phase_; }
  int weight() const { return static_cast<int>(factors_.size()); }
  /// max site - min site + 1, or 0 for the identity.
  int range() const;
  bool is_identity() const { return factors_.empty(); }
  bool is_hermitian() const { return phase_.is_real(); }
  Axis at(int site) const;

  PauliString without_phase() const;
  PauliString with_phase(Phase p) const;
  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  /// Orders by support, then phase; used for canonical maps.
  friend bool operator<(const PauliString& a, const PauliString& b);

 private:
  std::vector<PauliFactor> factors_;
  Phase phase_;
};

PauliString multiply(const PauliString& p, const PauliString& q);
/// Shifts every site by `offset` modulo `system_size`. Factors that land on the
/// same site are multiplied together in ascending original-site order.
PauliString translate(const PauliString& p, int offset, int system_size);
PauliString adjoint(const PauliString& p);

/// Template Pauli operators anchored at site 0.
struct TemplatePool {
  std::vector<PauliString> templates;
  int max_weight = 0;
  int max_range = 0;

  int size() const { return static_cast<int>(templates.size()); }
};

/// Single-site X, Y, Z, then for every separation d = 1..R-1 the nine
/// two-site products on sites (0, d) in lexical axis order.
TemplatePool generate_templates(int max_weight, int max_range);

class StringTable;

struct GramTerm {
  std::complex<double> coef;
  std::uint32_t string = 0;
};

/// Cached expansion of momentum-resolved Gram matrix entries
///   M^(k)_ij = (1/L) sum_{x,y} e^{ik(y-x)} <T_x(O_i) T_y(O_j)>,  k = 2 pi m / L,
/// into phase-free Pauli strings with merged complex coefficients.
class GramExpansion {
 public:
  GramExpansion(const TemplatePool& pool, int system_size);

  int system_size() const { return system_size_; }
  int dim() const { return dim_; }
  int num_momenta() const { return system_size_; }
  double momentum(int m) const;

  const StringTable& strings() const { return *strings_; }
  std::span<const GramTerm> entry(int m, int i, int j) const;

  Eigen::MatrixXcd assemble(int m, const Eigen::VectorXd& string_means) const;
  std::vector<Eigen::MatrixXcd> assemble(const Eigen::VectorXd& string_means) const;

  /// Gradient of loss = Re sum_{m,i,j} weights[m](i,j) * M^(m)_ij with respect
  /// to the string means; accumulated into `d_means`.
  void pullback(std::span<const Eigen::MatrixXcd> weights, Eigen::VectorXd& d_means) const;

 private:
  std::size_t offset(int m, int i, int j) const;

  int system_size_ = 0;
  int dim_ = 0;
  std::shared_ptr<StringTable> strings_;
  std::vector<std::size_t> starts_;
  std::vector<GramTerm> terms_;
};

/// Process-wide cache keyed on (max_weight, max_range, L).
std::shared_ptr<const GramExpansion> cached_gram_expansion(const TemplatePool& pool,
                                                           int system_size);

}  // namespace povm
