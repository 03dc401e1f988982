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

#include <string>
#include <string_view>
#include <vector>

#include "povm/pauli.hpp"

namespace povm {

struct HamiltonianTerm {
  double coef = 0.0;
  PauliString op;  // phase +1
};

/// H = sum_j h_j P_j on a periodic chain of L sites.
struct HamiltonianSpec {
  std::string name;
  int system_size = 0;
  std::vector<HamiltonianTerm> terms;
  bool periodic = true;

  /// 0.3 sum X_i X_{i+1} + 0.3 sum Z_i
  static HamiltonianSpec tfim(int L);
  /// 0.3 sum X_i X_{i+1} + 0.6 sum Z_i
  static HamiltonianSpec gapped_tfim(int L);
  /// 0.3 sum (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1})
  static HamiltonianSpec heisenberg(int L);
  /// TFIM | GappedTFIM | Heisenberg
  static HamiltonianSpec preset(std::string_view name, int L);
  /// Terms written as "0.5 X0 X1". With `translate`, every term is summed
  /// over all L translations.
  static HamiltonianSpec custom(int L, const std::vector<std::string>& terms, bool translate);

  /// Throws std::invalid_argument for non-Hermitian terms or sites outside [0, L).
  void validate() const;
  /// Folds +-1 phases into coefficients.
  void add_term(double coef, const PauliString& op);
};

}  // namespace povm
