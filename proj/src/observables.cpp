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

#include "povm/observables.hpp"

#include <stdexcept>

namespace povm {

namespace {

// Columns X, Y, Z of the dual coefficient table (4 x 3).
const Eigen::Matrix<double, 4, 3>& axis_table() {
  static const Eigen::Matrix<double, 4, 3> t = dual_coefficient_matrix().rightCols<3>();
  return t;
}

}  // namespace

SiteValues::SiteValues(int samples, int sites) : sites_(sites), columns_(samples, 3 * sites) {}

SiteValues SiteValues::from_outcomes(const OutcomeBatch& batch) {
  SiteValues v(batch.size(), batch.length());
  const auto& c = dual_coefficients();
  for (int s = 0; s < batch.size(); ++s) {
    const auto row = batch.row(s);
    for (int j = 0; j < batch.length(); ++j)
      for (int p = 0; p < 3; ++p) v.columns_(s, 3 * j + p) = c[row[j]][p + 1];
  }
  return v;
}

SiteValues SiteValues::from_soft(const Eigen::ArrayXXd& soft, int sites) {
  if (soft.cols() != 4 * sites) throw std::invalid_argument("soft outcomes must have 4L columns");
  SiteValues v(static_cast<int>(soft.rows()), sites);
  for (int j = 0; j < sites; ++j)
    v.columns_.middleCols(3 * j, 3) = (soft.middleCols(4 * j, 4).matrix() * axis_table()).array();
  return v;
}

Eigen::ArrayXXd site_value_pullback(const Eigen::ArrayXXd& d_columns, int sites) {
  Eigen::ArrayXXd d_soft(d_columns.rows(), 4 * sites);
  for (int j = 0; j < sites; ++j)
    d_soft.middleCols(4 * j, 4) = (d_columns.middleCols(3 * j, 3).matrix() * axis_table().transpose()).array();
  return d_soft;
}

StringTable::StringTable() { insert(PauliString()); }

std::uint32_t StringTable::insert(const PauliString& p) {
  PauliString key = p.without_phase();
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const auto k = static_cast<std::uint32_t>(strings_.size());
  std::vector<int> cols;
  for (const auto& f : key.factors()) cols.push_back(SiteValues::column(f.site, f.axis));
  columns_.push_back(std::move(cols));
  index_.emplace(key, k);
  strings_.push_back(std::move(key));
  return k;
}

int StringTable::find(const PauliString& p) const {
  auto it = index_.find(p.without_phase());
  return it == index_.end() ? -1 : static_cast<int>(it->second);
}

Eigen::ArrayXd StringTable::sample_values(const SiteValues& v, int k) const {
  const auto& c = v.columns();
  Eigen::ArrayXd out = Eigen::ArrayXd::Ones(c.rows());
  for (int col : columns_[k]) {
    if (col >= c.cols()) throw std::out_of_range("string " + strings_[k].to_string() + " exceeds system size");
    out *= c.col(col);
  }
  return out;
}

Eigen::VectorXd StringTable::means(const SiteValues& v) const {
  const auto& c = v.columns();
  const Eigen::Index n = c.rows();
  if (n == 0) throw std::invalid_argument("cannot average over an empty sample set");
  for (const auto& cols : columns_)
    for (int col : cols)
      if (col >= c.cols()) throw std::out_of_range("string exceeds system size of the samples");

  Eigen::VectorXd out(size());
  if (v.weighted()) {
    const Eigen::ArrayXd& w = v.weights();
    for (int k = 0; k < size(); ++k) {
      const auto& f = columns_[k];
      switch (f.size()) {
        case 0: out[k] = w.sum(); break;
        case 1: out[k] = (w * c.col(f[0])).sum(); break;
        case 2: out[k] = (w * c.col(f[0]) * c.col(f[1])).sum(); break;
        default: out[k] = (w * sample_values(v, k)).sum(); break;
      }
    }
    return out;
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (int k = 0; k < size(); ++k) {
    const auto& f = columns_[k];
    switch (f.size()) {
      case 0: out[k] = 1.0; break;
      case 1: out[k] = c.col(f[0]).sum() * inv; break;
      case 2: out[k] = (c.col(f[0]) * c.col(f[1])).sum() * inv; break;
      case 3: out[k] = (c.col(f[0]) * c.col(f[1]) * c.col(f[2])).sum() * inv; break;
      case 4: out[k] = (c.col(f[0]) * c.col(f[1]) * c.col(f[2]) * c.col(f[3])).sum() * inv; break;
      default: out[k] = sample_values(v, k).sum() * inv; break;
    }
  }
  return out;
}

void StringTable::pullback(const SiteValues& v, const Eigen::VectorXd& d_means, Eigen::ArrayXXd& d_columns) const {
  const auto& c = v.columns();
  if (d_means.size() != size()) throw std::invalid_argument("gradient size does not match string table");
  if (d_columns.rows() != c.rows() || d_columns.cols() != c.cols()) d_columns = Eigen::ArrayXXd::Zero(c.rows(), c.cols());
  const Eigen::ArrayXd scale =
      v.weighted() ? v.weights() : Eigen::ArrayXd::Constant(c.rows(), 1.0 / static_cast<double>(c.rows()));
  Eigen::ArrayXd partial(c.rows());
  for (int k = 0; k < size(); ++k) {
    const double d = d_means[k];
    if (d == 0.0) continue;
    const auto& f = columns_[k];
    for (std::size_t a = 0; a < f.size(); ++a) {
      partial = d * scale;
      for (std::size_t b = 0; b < f.size(); ++b)
        if (b != a) partial *= c.col(f[b]);
      d_columns.col(f[a]) += partial;
    }
  }
}

}  // namespace povm
