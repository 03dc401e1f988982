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

#include "povm/hamiltonian.hpp"

#include <sstream>
#include <stdexcept>

namespace povm {

namespace {

HamiltonianSpec bond_chain(std::string name, int L, std::initializer_list<Axis> bond_axes, double bond,
                           double field) {
  if (L < 1) throw std::invalid_argument("system size must be positive");
  HamiltonianSpec h;
  h.name = std::move(name);
  h.system_size = L;
  for (int i = 0; i < L; ++i) {
    for (Axis a : bond_axes) h.add_term(bond, translate(PauliString({{0, a}, {1, a}}), i, L));
    if (field != 0.0) h.add_term(field, PauliString::single(i, Axis::Z));
  }
  return h;
}

}  // namespace

void HamiltonianSpec::add_term(double coef, const PauliString& op) {
  if (!op.is_hermitian()) throw std::invalid_argument("non-Hermitian Hamiltonian term " + op.to_string());
  const double sign = op.phase() == Phase::minus_one() ? -1.0 : 1.0;
  terms.push_back({coef * sign, op.without_phase()});
}

HamiltonianSpec HamiltonianSpec::tfim(int L) { return bond_chain("TFIM", L, {Axis::X}, 0.3, 0.3); }

HamiltonianSpec HamiltonianSpec::gapped_tfim(int L) { return bond_chain("GappedTFIM", L, {Axis::X}, 0.3, 0.6); }

HamiltonianSpec HamiltonianSpec::heisenberg(int L) {
  return bond_chain("Heisenberg", L, {Axis::X, Axis::Y, Axis::Z}, 0.3, 0.0);
}

HamiltonianSpec HamiltonianSpec::preset(std::string_view name, int L) {
  if (name == "TFIM") return tfim(L);
  if (name == "GappedTFIM") return gapped_tfim(L);
  if (name == "Heisenberg") return heisenberg(L);
  throw std::invalid_argument("unknown Hamiltonian preset '" + std::string(name) +
                              "' (expected TFIM, GappedTFIM, Heisenberg or custom)");
}

HamiltonianSpec HamiltonianSpec::custom(int L, const std::vector<std::string>& terms, bool translate_terms) {
  if (L < 1) throw std::invalid_argument("system size must be positive");
  HamiltonianSpec h;
  h.name = "custom";
  h.system_size = L;
  for (const auto& text : terms) {
    std::istringstream in(text);
    double coef = 0.0;
    if (!(in >> coef)) throw std::invalid_argument("term '" + text + "' must start with a coefficient");
    std::string rest;
    std::getline(in, rest);
    const PauliString op = PauliString::parse(rest);
    if (translate_terms) {
      for (int x = 0; x < L; ++x) h.add_term(coef, translate(op, x, L));
    } else {
      h.add_term(coef, op);
    }
  }
  h.validate();
  return h;
}

void HamiltonianSpec::validate() const {
  if (system_size < 1) throw std::invalid_argument("system size must be positive");
  for (const auto& t : terms) {
    if (!t.op.is_hermitian()) throw std::invalid_argument("non-Hermitian term " + t.op.to_string());
    for (const auto& f : t.op.factors())
      if (f.site < 0 || f.site >= system_size)
        throw std::invalid_argument("term " + t.op.to_string() + " acts outside the chain");
  }
}

}  // namespace povm
