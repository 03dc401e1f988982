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

#include "povm/frame.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace povm {

OutcomeBatch::OutcomeBatch(int count, int length)
    : length_(length), data_(std::size_t(count) * std::size_t(length), 0) {}

void OutcomeBatch::push_back(std::span<const Outcome> s) {
  if (static_cast<int>(s.size()) != length_)
    throw std::invalid_argument("outcome string length " + std::to_string(s.size()) + " != " +
                                std::to_string(length_));
  data_.insert(data_.end(), s.begin(), s.end());
}

void OutcomeBatch::append(const OutcomeBatch& other) {
  if (other.empty()) return;
  if (other.length_ != length_) throw std::invalid_argument("outcome batch length mismatch");
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
}

OutcomeBatch OutcomeBatch::select(std::span<const int> indices) const {
  OutcomeBatch out(length_);
  out.data_.reserve(indices.size() * std::size_t(length_));
  for (int i : indices) out.push_back(row(i));
  return out;
}

const FrameVectors& frame_vectors() {
  static const FrameVectors frame = [] {
    const double s = 1.0 / std::sqrt(3.0);
    FrameVectors f;
    f.n[0] = Eigen::Vector3d(1, 1, 1) * s;
    f.n[1] = Eigen::Vector3d(1, -1, -1) * s;
    f.n[2] = Eigen::Vector3d(-1, 1, -1) * s;
    f.n[3] = Eigen::Vector3d(-1, -1, 1) * s;
    return f;
  }();
  return frame;
}

const DualCoefficients& dual_coefficients() {
  static const DualCoefficients table = [] {
    DualCoefficients c{};
    for (int a = 0; a < 4; ++a) {
      c[a][0] = 1.0;
      for (int p = 0; p < 3; ++p) c[a][p + 1] = 3.0 * frame_vectors().n[a][p];
    }
    return c;
  }();
  return table;
}

const Eigen::Matrix4d& dual_coefficient_matrix() {
  static const Eigen::Matrix4d m = [] {
    Eigen::Matrix4d out;
    for (int a = 0; a < 4; ++a)
      for (int p = 0; p < 4; ++p) out(a, p) = dual_coefficients()[a][p];
    return out;
  }();
  return m;
}

Eigen::Matrix2cd pauli_matrix(Axis a) {
  using C = std::complex<double>;
  Eigen::Matrix2cd m;
  switch (a) {
    case Axis::I: m << 1, 0, 0, 1; break;
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, C(0, -1), C(0, 1), 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

namespace {

Eigen::Matrix2cd bloch_operator(const Eigen::Vector3d& r) {
  return r[0] * pauli_matrix(Axis::X) + r[1] * pauli_matrix(Axis::Y) + r[2] * pauli_matrix(Axis::Z);
}

void check_outcome(int a) {
  if (a < 0 || a > 3) throw std::out_of_range("POVM outcome index " + std::to_string(a) + " not in 0..3");
}

}  // namespace

Eigen::Matrix2cd QubitState::density() const {
  return 0.5 * (Eigen::Matrix2cd::Identity() + bloch_operator(bloch));
}

Eigen::Matrix2cd effect_matrix(int a) {
  check_outcome(a);
  return 0.25 * (Eigen::Matrix2cd::Identity() + bloch_operator(frame_vectors().n[a]));
}

Eigen::Matrix2cd dual_matrix(int a) {
  check_outcome(a);
  return 0.5 * (Eigen::Matrix2cd::Identity() + bloch_operator(3.0 * frame_vectors().n[a]));
}

QubitState reconstruct_qubit(const Eigen::Vector4d& probs) {
  if ((probs.array() < -1e-10).any()) throw std::invalid_argument("negative outcome probability");
  if (std::abs(probs.sum() - 1.0) > 1e-10) throw std::invalid_argument("outcome probabilities do not sum to 1");
  QubitState s;
  for (int a = 0; a < 4; ++a) s.bloch += 3.0 * probs[a] * frame_vectors().n[a];
  return s;
}

Eigen::Vector4d probs_from_state(const QubitState& state) {
  if (!state.physical(1e-12)) throw std::invalid_argument("Bloch vector longer than 1");
  Eigen::Vector4d p;
  for (int a = 0; a < 4; ++a) p[a] = 0.25 * (1.0 + state.bloch.dot(frame_vectors().n[a]));
  return p;
}

bool physical_distribution(const Eigen::Vector4d& probs, double tol) {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  for (int a = 0; a < 4; ++a) r += 3.0 * probs[a] * frame_vectors().n[a];
  return r.squaredNorm() <= 1.0 + tol;
}

std::complex<double> pauli_sample_value(std::span<const Outcome> outcomes, const PauliString& p) {
  const auto& c = dual_coefficients();
  double v = 1.0;
  for (const auto& f : p.factors()) {
    if (f.site < 0 || f.site >= static_cast<int>(outcomes.size()))
      throw std::out_of_range("Pauli factor outside the outcome string");
    v *= c[outcomes[f.site]][static_cast<int>(f.axis)];
  }
  return p.phase().value() * v;
}

double variance_bound(int weight, long long samples) {
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  return std::pow(9.0, weight) / static_cast<double>(samples);
}

}  // namespace povm
