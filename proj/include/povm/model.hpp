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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "povm/frame.hpp"

namespace povm {

/// One GRU layer. Gate blocks are stacked as rows [update z; reset r; candidate].
struct GruLayerParams {
  Eigen::MatrixXd W;  // 3H x D_in
  Eigen::MatrixXd U;  // 3H x H
  Eigen::VectorXd b;  // 3H

  GruLayerParams() = default;
  GruLayerParams(int input_dim, int hidden_dim);

  int hidden() const { return static_cast<int>(U.cols()); }
  int input() const { return static_cast<int>(W.cols()); }
};

/// z = s(W_z x + U_z h + b_z), r = s(W_r x + U_r h + b_r),
/// c = tanh(W_c x + U_c (r . h) + b_c), h' = (1 - z) . h + z . c
Eigen::VectorXd gru_cell(const GruLayerParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& h);

struct ModelDims {
  int hidden = 64;
  int layers = 2;
  bool dual_stream = true;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Autoregressive sampler over POVM outcomes. The uniform stream reads the
/// one-hot previous outcome (4 inputs); the parity stream additionally reads
/// (-1)^j (5 inputs). Final-layer states are fused as
///   h_out = h0 + sigmoid(W_g h0 + b_g) . h_pi
/// and mapped to four logits by the output head. Site 0 reads an all-zero
/// outcome vector and starts from the learned initial states.
class DualStreamModel {
 public:
  DualStreamModel() = default;
  /// All parameters zero.
  explicit DualStreamModel(const ModelDims& dims);
  /// Weights uniform in [-1/sqrt(H), 1/sqrt(H)], biases and initial states zero.
  static DualStreamModel initialize(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }

  std::vector<GruLayerParams> uniform;
  std::vector<GruLayerParams> parity;
  std::vector<Eigen::VectorXd> uniform_init;
  std::vector<Eigen::VectorXd> parity_init;
  Eigen::MatrixXd gate_W;
  Eigen::VectorXd gate_b;
  Eigen::MatrixXd out_W;  // 4 x H
  Eigen::VectorXd out_b;  // 4

  /// Calls f(name, array) for every parameter block in a fixed order.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  Eigen::Index num_parameters() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
  DualStreamModel zeros_like() const { return DualStreamModel(dims_); }
  bool all_finite() const;

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    for (std::size_t l = 0; l < self.uniform.size(); ++l) {
      const std::string p = "uniform." + std::to_string(l) + ".";
      f(p + "W", self.uniform[l].W);
      f(p + "U", self.uniform[l].U);
      f(p + "b", self.uniform[l].b);
      f(p + "h0", self.uniform_init[l]);
    }
    for (std::size_t l = 0; l < self.parity.size(); ++l) {
      const std::string p = "parity." + std::to_string(l) + ".";
      f(p + "W", self.parity[l].W);
      f(p + "U", self.parity[l].U);
      f(p + "b", self.parity[l].b);
      f(p + "h0", self.parity_init[l]);
    }
    if (self.dims_.dual_stream) {
      f(std::string("gate.W"), self.gate_W);
      f(std::string("gate.b"), self.gate_b);
    }
    f(std::string("out.W"), self.out_W);
    f(std::string("out.b"), self.out_b);
  }

  ModelDims dims_;
};

/// Logits of p(i_j | prefix) with j = prefix.size().
Eigen::Vector4d forward_logits(const DualStreamModel& model, std::span<const Outcome> prefix);
Eigen::Vector4d conditional_probabilities(const DualStreamModel& model, std::span<const Outcome> prefix);
/// log p(s) = sum_j log p(s_j | s_<j).
double log_probability(const DualStreamModel& model, std::span<const Outcome> outcomes);
/// log p for every row of the batch.
Eigen::VectorXd log_probabilities(const DualStreamModel& model, const OutcomeBatch& batch);

struct InferenceSamples {
  OutcomeBatch outcomes;
  Eigen::VectorXd log_prob;
};

/// Ancestral sampling without gradient bookkeeping. Samples are drawn in
/// chunks of `chunk` with independent RNG streams derived from `seed`.
InferenceSamples sample_inference(const DualStreamModel& model, int length, int count, std::uint64_t seed,
                                  int chunk = 1024);

/// Forward caches of a gradient-carrying batch.
class ForwardTape {
 public:
  struct LayerStep {
    Eigen::MatrixXd input, prev, z, r, c, h;
  };
  struct SiteStep {
    std::vector<LayerStep> uniform, parity;
    Eigen::MatrixXd gate, fused;
  };

  int length() const { return length_; }
  int batch() const { return batch_; }
  const OutcomeBatch& outcomes() const { return outcomes_; }
  /// N x 4L raw logits.
  const Eigen::ArrayXXd& logits() const { return logits_; }

 private:
  friend class ForwardRunner;
  friend DualStreamModel backward_logits(const DualStreamModel&, const ForwardTape&, const Eigen::ArrayXXd&);

  int length_ = 0;
  int batch_ = 0;
  OutcomeBatch outcomes_;
  Eigen::ArrayXXd logits_;
  std::vector<SiteStep> sites_;
};

/// Teacher-forced forward pass on fixed outcome strings.
ForwardTape forward_tape(const DualStreamModel& model, const OutcomeBatch& outcomes);

/// Gumbel-softmax straight-through samples. The hard outcome is the argmax of
/// the noisy logits and is fed forward as a constant one-hot; the relaxed
/// vector softmax((logits + g)/T) carries the gradient.
struct GumbelSamples {
  ForwardTape tape;
  Eigen::ArrayXXd noisy_logits;  // N x 4L
  Eigen::ArrayXXd soft;          // N x 4L
  double temperature = 1.0;

  const OutcomeBatch& outcomes() const { return tape.outcomes(); }
};

GumbelSamples sample_gumbel_st(const DualStreamModel& model, int length, int count, double temperature,
                               std::uint64_t seed);

/// Parameter gradient of a loss given d(loss)/d(logits), N x 4L. Outcome
/// inputs are constants of the graph.
DualStreamModel backward_logits(const DualStreamModel& model, const ForwardTape& tape,
                                const Eigen::ArrayXXd& d_logits);
/// Parameter gradient given d(loss)/d(soft samples), N x 4L.
DualStreamModel backward(const DualStreamModel& model, const GumbelSamples& samples, const Eigen::ArrayXXd& d_soft);

}  // namespace povm
