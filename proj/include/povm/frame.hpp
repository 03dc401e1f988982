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

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "povm/pauli.hpp"

namespace povm {

using Outcome = std::uint8_t;
using OutcomeString = std::vector<Outcome>;

/// Row-major batch of outcome strings sharing one length L.
class OutcomeBatch {
 public:
  OutcomeBatch() = default;
  explicit OutcomeBatch(int length) : length_(length) {}
  OutcomeBatch(int count, int length);

  int size() const { return length_ == 0 ? 0 : static_cast<int>(data_.size() / std::size_t(length_)); }
  int length() const { return length_; }
  bool empty() const { return size() == 0; }

  std::span<Outcome> row(int i) { return {data_.data() + std::size_t(i) * length_, std::size_t(length_)}; }
  std::span<const Outcome> row(int i) const {
    return {data_.data() + std::size_t(i) * length_, std::size_t(length_)};
  }
  Outcome at(int i, int site) const { return data_[std::size_t(i) * length_ + site]; }

  void push_back(std::span<const Outcome> s);
  void append(const OutcomeBatch& other);
  OutcomeBatch select(std::span<const int> indices) const;

  std::span<const Outcome> data() const { return data_; }

 private:
  int length_ = 0;
  std::vector<Outcome> data_;
};

/// Bloch vectors of the tetrahedral SIC-POVM, n[a] for a = 0..3.
struct FrameVectors {
  std::array<Eigen::Vector3d, 4> n;
};

const FrameVectors& frame_vectors();

/// c[a][p] = Tr[F_a sigma_p]: 1 for p = I and 3 n[a]^p otherwise.
using DualCoefficients = std::array<std::array<double, 4>, 4>;
const DualCoefficients& dual_coefficients();

/// 4x4 matrix with rows a (outcome) and columns p (I, X, Y, Z).
const Eigen::Matrix4d& dual_coefficient_matrix();

struct QubitState {
  Eigen::Vector3d bloch = Eigen::Vector3d::Zero();

  Eigen::Matrix2cd density() const;
  bool physical(double tol = 1e-12) const { return bloch.norm() <= 1.0 + tol; }
};

Eigen::Matrix2cd pauli_matrix(Axis a);

/// (1/4)(I + n[a] . sigma)
Eigen::Matrix2cd effect_matrix(int a);
/// (1/2)(I + 3 n[a] . sigma)
Eigen::Matrix2cd dual_matrix(int a);

/// Bloch vector 3 sum_a p_a n[a]; throws if p is not a distribution.
QubitState reconstruct_qubit(const Eigen::Vector4d& probs);
/// p_a = (1 + r . n[a]) / 4; throws for |r| > 1.
Eigen::Vector4d probs_from_state(const QubitState& state);

/// True iff |3 sum_a p_a n[a]|^2 <= 1 (up to tol).
bool physical_distribution(const Eigen::Vector4d& probs, double tol = 1e-12);

/// Single-sample unbiased estimate Tr[F_s P], including P's phase.
std::complex<double> pauli_sample_value(std::span<const Outcome> outcomes, const PauliString& p);

/// 3^{2w} / N
double variance_bound(int weight, long long samples);

}  // namespace povm
