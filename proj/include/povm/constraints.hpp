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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "povm/frame.hpp"
#include "povm/observables.hpp"
#include "povm/pauli.hpp"

namespace povm {

enum class GramSource { train, val, grad };

std::string to_string(GramSource s);

/// Sample estimates of M^(k) for every momentum index m = 0..L-1.
struct GramEstimate {
  GramSource source = GramSource::train;
  std::vector<Eigen::MatrixXcd> matrices;
  /// Per-string sample means the matrices were assembled from.
  Eigen::VectorXd string_means;
  int samples = 0;
};

/// Hermitian-symmetrized Gram estimates from per-sample site values (hard,
/// soft or exhaustively weighted).
GramEstimate build_gram(const SiteValues& values, const GramExpansion& expansion, GramSource source);
GramEstimate build_gram(const OutcomeBatch& samples, const GramExpansion& expansion, GramSource source);
/// Assembles from precomputed string means.
GramEstimate gram_from_means(const Eigen::VectorXd& means, const GramExpansion& expansion, GramSource source,
                             int samples);

struct SplitHalves {
  OutcomeBatch train;
  OutcomeBatch validation;
  /// True when an odd count forced one sample to be dropped.
  bool dropped = false;
};

/// Seeded shuffle into two disjoint halves of equal size.
SplitHalves split_halves(const OutcomeBatch& samples, std::uint64_t seed);

struct Tolerance {
  double tau = 1.0;
  double s = 1.0;
};

struct MomentumSpectrum {
  Eigen::VectorXd lambda_tr;  // ascending
  Eigen::MatrixXcd vectors;   // columns
  Eigen::VectorXd lambda_val;
  Eigen::VectorXd delta;
  double quantile = 0.0;  // P65 of delta
  double tau_k = 0.0;
  double s_k = 0.0;
};

struct SpectralData {
  std::vector<MomentumSpectrum> momenta;
};

inline constexpr double kToleranceFloor = 1e-8;

/// Nearest-rank 65th percentile: the ceil(0.65 n)-th smallest value.
double percentile65(std::span<const double> values);

SpectralData validate_spectrum(const GramEstimate& train, const GramEstimate& validation, const Tolerance& tol);

/// Split, build both Grams and validate; the whole buffer step on a fixed batch.
SpectralData sample_spectrum(const OutcomeBatch& samples, const GramExpansion& expansion, const Tolerance& tol,
                             std::uint64_t split_seed);

/// lambda_val in units of the momentum's P65 noise scale.
struct NoiseRatio {
  int momentum = 0;
  int mode = 0;
  double lambda_tr = 0.0;
  double lambda_val = 0.0;
  double delta = 0.0;
  double scale = 0.0;
  double ratio = 0.0;
};

/// Modes with |ratio| up to this count as zero up to sampling noise.
inline constexpr double kNearZeroRatio = 10.0;

std::vector<NoiseRatio> noise_ratios(const SpectralData& spectrum);

/// 1 / (1 + exp((lambda + tau_k) / s_k)), evaluated without overflow.
double fermi_weight(double lambda, double tau_k, double s_k);

struct ConstraintReport {
  double loss = 0.0;
  double violation = 0.0;  // P
  std::vector<double> min_lambda_val;
  std::vector<double> tau_k;
  int active_modes = 0;  // f > 0.01
};

nlohmann::json to_json(const ConstraintReport& r);

struct PsdLoss {
  ConstraintReport report;
  /// loss = Re sum_{m,i,j} weights[m](i,j) * M_grad^(m)_ij
  std::vector<Eigen::MatrixXcd> weights;
};

/// sum_{k,a} f(lambda_val) * (-Re v_a^dag M_grad v_a), with eigenvectors and
/// weights held fixed.
PsdLoss psd_loss(const SpectralData& spectrum, const GramEstimate& grad);
/// Weights and report only; the loss value is computed against `grad` later.
PsdLoss psd_weights(const SpectralData& spectrum);

}  // namespace povm
