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

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "povm/frame.hpp"
#include "povm/pauli.hpp"

namespace povm {

/// Per-sample dual-frame values Tr[F_{s_j} sigma_p] laid out as an N x 3L array,
/// column 3*site + (axis - 1). Soft samples carry convex combinations of the
/// outcome rows instead of a single row.
class SiteValues {
 public:
  SiteValues() = default;
  SiteValues(int samples, int sites);

  static SiteValues from_outcomes(const OutcomeBatch& batch);
  /// `soft` is N x 4L with the relaxed one-hot for site j in columns 4j..4j+3.
  static SiteValues from_soft(const Eigen::ArrayXXd& soft, int sites);

  int samples() const { return static_cast<int>(columns_.rows()); }
  int sites() const { return sites_; }

  Eigen::ArrayXXd& columns() { return columns_; }
  const Eigen::ArrayXXd& columns() const { return columns_; }

  static int column(int site, Axis a) { return 3 * site + static_cast<int>(a) - 1; }

  /// Optional per-sample weights summing to one. Empty means uniform 1/N.
  void set_weights(Eigen::ArrayXd w) { weights_ = std::move(w); }
  const Eigen::ArrayXd& weights() const { return weights_; }
  bool weighted() const { return weights_.size() > 0; }

 private:
  int sites_ = 0;
  Eigen::ArrayXXd columns_;
  Eigen::ArrayXd weights_;
};

/// Converts d(loss)/d(site values) to d(loss)/d(soft one-hot), N x 4L.
Eigen::ArrayXXd site_value_pullback(const Eigen::ArrayXXd& d_columns, int sites);

/// A deduplicated set of phase-free Pauli strings with vectorized
/// sample averaging.
class StringTable {
 public:
  StringTable();

  /// Index of the (phase-stripped) string, inserting it if new. Index 0 is
  /// always the identity.
  std::uint32_t insert(const PauliString& p);
  int find(const PauliString& p) const;

  int size() const { return static_cast<int>(strings_.size()); }
  const PauliString& string(int k) const { return strings_[k]; }

  /// Sample means (weighted if the site values carry weights).
  Eigen::VectorXd means(const SiteValues& v) const;
  /// Per-sample values of one string.
  Eigen::ArrayXd sample_values(const SiteValues& v, int k) const;
  /// Accumulates d(loss)/d(columns) given d(loss)/d(means).
  void pullback(const SiteValues& v, const Eigen::VectorXd& d_means, Eigen::ArrayXXd& d_columns) const;

 private:
  std::vector<PauliString> strings_;
  std::vector<std::vector<int>> columns_;
  std::map<PauliString, std::uint32_t> index_;
};

}  // namespace povm
