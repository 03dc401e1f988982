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

#include "povm/model.hpp"

#include <cmath>
#include <stdexcept>

#include "povm/parallel.hpp"
#include "povm/random.hpp"

namespace povm {

using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

GruLayerParams::GruLayerParams(int input_dim, int hidden_dim)
    : W(MatrixXd::Zero(3 * hidden_dim, input_dim)),
      U(MatrixXd::Zero(3 * hidden_dim, hidden_dim)),
      b(VectorXd::Zero(3 * hidden_dim)) {}

DualStreamModel::DualStreamModel(const ModelDims& dims) : dims_(dims) {
  if (dims.hidden < 1 || dims.layers < 1) throw std::invalid_argument("model: hidden and layers must be positive");
  const int H = dims.hidden;
  for (int l = 0; l < dims.layers; ++l) {
    uniform.emplace_back(l == 0 ? 4 : H, H);
    uniform_init.push_back(VectorXd::Zero(H));
    if (dims.dual_stream) {
      parity.emplace_back(l == 0 ? 5 : H, H);
      parity_init.push_back(VectorXd::Zero(H));
    }
  }
  if (dims.dual_stream) {
    gate_W = MatrixXd::Zero(H, H);
    gate_b = VectorXd::Zero(H);
  }
  out_W = MatrixXd::Zero(4, H);
  out_b = VectorXd::Zero(4);
}

DualStreamModel DualStreamModel::initialize(const ModelDims& dims, std::uint64_t seed) {
  DualStreamModel m(dims);
  Rng rng(derive_seed(seed, {0x6d6f64656cULL}));
  const double a = 1.0 / std::sqrt(double(dims.hidden));
  m.visit([&](const std::string& name, auto& x) {
    const char last = name.back();
    if (last != 'W' && last != 'U') return;
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = a * (2.0 * uniform01(rng) - 1.0);
  });
  return m;
}

Eigen::Index DualStreamModel::num_parameters() const {
  Eigen::Index n = 0;
  visit([&](const std::string&, const auto& x) { n += x.size(); });
  return n;
}

VectorXd DualStreamModel::flatten() const {
  VectorXd flat(num_parameters());
  Eigen::Index off = 0;
  visit([&](const std::string&, const auto& x) {
    std::copy(x.data(), x.data() + x.size(), flat.data() + off);
    off += x.size();
  });
  return flat;
}

void DualStreamModel::unflatten(const VectorXd& flat) {
  if (flat.size() != num_parameters()) throw std::invalid_argument("unflatten: size mismatch");
  Eigen::Index off = 0;
  visit([&](const std::string&, auto& x) {
    std::copy(flat.data() + off, flat.data() + off + x.size(), x.data());
    off += x.size();
  });
}

bool DualStreamModel::all_finite() const {
  bool ok = true;
  visit([&](const std::string&, const auto& x) { ok = ok && x.allFinite(); });
  return ok;
}

namespace {

ArrayXXd sigmoid(const ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

// prev[n * stride] is the previous outcome of sample n; null at site 0.
MatrixXd input_matrix(const Outcome* prev, int stride, int n, int dim, int site) {
  MatrixXd x = MatrixXd::Zero(dim, n);
  if (prev)
    for (int i = 0; i < n; ++i) x(prev[std::size_t(i) * stride], i) = 1.0;
  if (dim == 5) x.row(4).setConstant(site % 2 == 0 ? 1.0 : -1.0);
  return x;
}

void gru_forward(const GruLayerParams& p, const MatrixXd& x, const MatrixXd& hp, MatrixXd& hn,
                 ForwardTape::LayerStep* cache) {
  const int H = p.hidden();
  MatrixXd g = p.W * x;
  g.colwise() += p.b;
  g.topRows(2 * H).noalias() += p.U.topRows(2 * H) * hp;
  ArrayXXd z = sigmoid(g.topRows(H).array());
  ArrayXXd r = sigmoid(g.middleRows(H, H).array());
  MatrixXd rh = (r * hp.array()).matrix();
  MatrixXd ca = g.bottomRows(H);
  ca.noalias() += p.U.bottomRows(H) * rh;
  ArrayXXd c = ca.array().tanh();
  hn = ((1.0 - z) * hp.array() + z * c).matrix();
  if (cache) {
    cache->input = x;
    cache->prev = hp;
    cache->z = z.matrix();
    cache->r = r.matrix();
    cache->c = c.matrix();
    cache->h = hn;
  }
}

// dh: gradient wrt the layer output. Accumulates parameter gradients into g,
// writes the gradient wrt the previous hidden state and optionally the input.
void gru_backward(const GruLayerParams& p, const ForwardTape::LayerStep& s, const MatrixXd& dh,
                  GruLayerParams& g, MatrixXd* dx, MatrixXd& dhp) {
  const int H = p.hidden();
  const auto z = s.z.array(), r = s.r.array(), c = s.c.array(), hp = s.prev.array();
  const ArrayXXd dha = dh.array();
  MatrixXd da(3 * H, dh.cols());
  da.topRows(H) = (dha * (c - hp) * z * (1.0 - z)).matrix();
  da.bottomRows(H) = (dha * z * (1.0 - c * c)).matrix();
  const MatrixXd rh = (r * hp).matrix();
  g.U.bottomRows(H).noalias() += da.bottomRows(H) * rh.transpose();
  const ArrayXXd drh = (p.U.bottomRows(H).transpose() * da.bottomRows(H)).array();
  da.middleRows(H, H) = (drh * hp * r * (1.0 - r)).matrix();
  dhp = (dha * (1.0 - z) + drh * r).matrix();
  dhp.noalias() += p.U.topRows(2 * H).transpose() * da.topRows(2 * H);
  g.U.topRows(2 * H).noalias() += da.topRows(2 * H) * s.prev.transpose();
  g.W.noalias() += da * s.input.transpose();
  g.b += da.rowwise().sum();
  if (dx) dx->noalias() = p.W.transpose() * da;
}

struct NetState {
  std::vector<MatrixXd> hu, hp;
};

NetState initial_state(const DualStreamModel& m, int n) {
  NetState s;
  for (const auto& h : m.uniform_init) s.hu.push_back(h.replicate(1, n));
  for (const auto& h : m.parity_init) s.hp.push_back(h.replicate(1, n));
  return s;
}

}  // namespace

class ForwardRunner {
 public:
  // Advances every stream by one site and returns 4 x N logits.
  static MatrixXd step(const DualStreamModel& m, NetState& st, const Outcome* prev, int stride, int n, int site,
                       ForwardTape::SiteStep* cache) {
    auto run = [&](const std::vector<GruLayerParams>& layers, std::vector<MatrixXd>& h, int dim,
                   std::vector<ForwardTape::LayerStep>* c) {
      MatrixXd x = input_matrix(prev, stride, n, dim, site);
      if (c) c->resize(layers.size());
      for (std::size_t l = 0; l < layers.size(); ++l) {
        MatrixXd hn;
        gru_forward(layers[l], x, h[l], hn, c ? &(*c)[l] : nullptr);
        h[l] = std::move(hn);
        x = h[l];
      }
    };
    run(m.uniform, st.hu, 4, cache ? &cache->uniform : nullptr);
    MatrixXd fused = st.hu.back();
    if (m.dims().dual_stream) {
      run(m.parity, st.hp, 5, cache ? &cache->parity : nullptr);
      MatrixXd a = m.gate_W * st.hu.back();
      a.colwise() += m.gate_b;
      const ArrayXXd g = sigmoid(a.array());
      fused.array() += g * st.hp.back().array();
      if (cache) cache->gate = g.matrix();
    }
    MatrixXd logits = m.out_W * fused;
    logits.colwise() += m.out_b;
    if (cache) cache->fused = std::move(fused);
    return logits;
  }

  static ForwardTape begin(int length, int n) {
    ForwardTape t;
    t.length_ = length;
    t.batch_ = n;
    t.outcomes_ = OutcomeBatch(n, length);
    t.logits_.resize(n, 4 * length);
    t.sites_.resize(length);
    return t;
  }
  static ForwardTape::SiteStep& site(ForwardTape& t, int j) { return t.sites_[j]; }
  static ArrayXXd& logits(ForwardTape& t) { return t.logits_; }
  static OutcomeBatch& outcomes(ForwardTape& t) { return t.outcomes_; }
};

namespace {

// Column-wise softmax of a 4 x N block, with the log-normalizer.
void softmax_columns(const MatrixXd& logits, MatrixXd& p, Eigen::RowVectorXd* log_z) {
  const Eigen::RowVectorXd mx = logits.colwise().maxCoeff();
  p = (logits.rowwise() - mx).array().exp().matrix();
  const Eigen::RowVectorXd s = p.colwise().sum();
  p.array().rowwise() /= s.array();
  if (log_z) *log_z = mx.array() + s.array().log();
}

}  // namespace

Eigen::VectorXd gru_cell(const GruLayerParams& p, const VectorXd& x, const VectorXd& h) {
  MatrixXd hn;
  gru_forward(p, x, h, hn, nullptr);
  return hn.col(0);
}

Eigen::Vector4d forward_logits(const DualStreamModel& model, std::span<const Outcome> prefix) {
  NetState st = initial_state(model, 1);
  MatrixXd logits;
  for (int j = 0; j <= int(prefix.size()); ++j)
    logits = ForwardRunner::step(model, st, j == 0 ? nullptr : prefix.data() + (j - 1), 1, 1, j, nullptr);
  return logits.col(0);
}

Eigen::Vector4d conditional_probabilities(const DualStreamModel& model, std::span<const Outcome> prefix) {
  const Eigen::Vector4d l = forward_logits(model, prefix);
  const Eigen::Vector4d e = (l.array() - l.maxCoeff()).exp();
  return e / e.sum();
}

double log_probability(const DualStreamModel& model, std::span<const Outcome> outcomes) {
  NetState st = initial_state(model, 1);
  double lp = 0.0;
  for (int j = 0; j < int(outcomes.size()); ++j) {
    const MatrixXd l = ForwardRunner::step(model, st, j == 0 ? nullptr : outcomes.data() + (j - 1), 1, 1, j, nullptr);
    const double mx = l.maxCoeff();
    lp += l(outcomes[j], 0) - mx - std::log((l.array() - mx).exp().sum());
  }
  return lp;
}

Eigen::VectorXd log_probabilities(const DualStreamModel& model, const OutcomeBatch& batch) {
  const int n = batch.size(), length = batch.length();
  VectorXd lp = VectorXd::Zero(n);
  if (n == 0) return lp;
  NetState st = initial_state(model, n);
  const Outcome* base = batch.data().data();
  for (int j = 0; j < length; ++j) {
    const MatrixXd l = ForwardRunner::step(model, st, j == 0 ? nullptr : base + (j - 1), length, n, j, nullptr);
    MatrixXd p;
    Eigen::RowVectorXd log_z;
    softmax_columns(l, p, &log_z);
    for (int i = 0; i < n; ++i) lp[i] += l(batch.at(i, j), i) - log_z[i];
  }
  return lp;
}

InferenceSamples sample_inference(const DualStreamModel& model, int length, int count, std::uint64_t seed,
                                  int chunk) {
  if (length < 1 || count < 0 || chunk < 1) throw std::invalid_argument("sample_inference: bad sizes");
  InferenceSamples out{OutcomeBatch(count, length), VectorXd::Zero(count)};
  const int chunks = (count + chunk - 1) / chunk;
  parallel_for(chunks, [&](int c) {
    const int begin = c * chunk, n = std::min(chunk, count - begin);
    Rng rng(derive_seed(seed, {0x696e66ULL, std::uint64_t(c)}));
    std::vector<Outcome> local(std::size_t(n) * length);
    NetState st = initial_state(model, n);
    MatrixXd p;
    for (int j = 0; j < length; ++j) {
      const MatrixXd l = ForwardRunner::step(model, st, j == 0 ? nullptr : local.data() + (j - 1), length, n, j, nullptr);
      softmax_columns(l, p, nullptr);
      for (int i = 0; i < n; ++i) {
        const double u = uniform01(rng);
        double acc = 0.0;
        int k = 0;
        for (; k < 3; ++k) {
          acc += p(k, i);
          if (u < acc) break;
        }
        local[std::size_t(i) * length + j] = Outcome(k);
        out.log_prob[begin + i] += std::log(p(k, i));
      }
    }
    for (int i = 0; i < n; ++i) {
      auto row = out.outcomes.row(begin + i);
      std::copy(local.begin() + std::size_t(i) * length, local.begin() + std::size_t(i + 1) * length, row.begin());
    }
  });
  return out;
}

ForwardTape forward_tape(const DualStreamModel& model, const OutcomeBatch& outcomes) {
  const int n = outcomes.size(), length = outcomes.length();
  ForwardTape t = ForwardRunner::begin(length, n);
  ForwardRunner::outcomes(t) = outcomes;
  NetState st = initial_state(model, n);
  const Outcome* base = outcomes.data().data();
  for (int j = 0; j < length; ++j) {
    const MatrixXd l = ForwardRunner::step(model, st, j == 0 ? nullptr : base + (j - 1), length, n, j,
                                           &ForwardRunner::site(t, j));
    ForwardRunner::logits(t).middleCols(4 * j, 4) = l.transpose().array();
  }
  return t;
}

GumbelSamples sample_gumbel_st(const DualStreamModel& model, int length, int count, double temperature,
                               std::uint64_t seed) {
  if (length < 1 || count < 1) throw std::invalid_argument("sample_gumbel_st: bad sizes");
  if (!(temperature > 0.0)) throw std::invalid_argument("sample_gumbel_st: temperature must be positive");
  GumbelSamples out;
  out.temperature = temperature;
  out.tape = ForwardRunner::begin(length, count);
  out.noisy_logits.resize(count, 4 * length);
  out.soft.resize(count, 4 * length);
  OutcomeBatch& hard = ForwardRunner::outcomes(out.tape);
  Rng rng(derive_seed(seed, {0x67756d626c65ULL}));
  NetState st = initial_state(model, count);
  // Outcomes are written in place; the prev pointer reads the batch's storage.
  const Outcome* base = hard.data().data();
  for (int j = 0; j < length; ++j) {
    const MatrixXd l = ForwardRunner::step(model, st, j == 0 ? nullptr : base + (j - 1), length, count, j,
                                           &ForwardRunner::site(out.tape, j));
    ForwardRunner::logits(out.tape).middleCols(4 * j, 4) = l.transpose().array();
    MatrixXd noisy = l;
    for (int i = 0; i < count; ++i)
      for (int k = 0; k < 4; ++k) noisy(k, i) -= std::log(-std::log(uniform_open01(rng)));
    MatrixXd y;
    softmax_columns(noisy / temperature, y, nullptr);
    out.noisy_logits.middleCols(4 * j, 4) = noisy.transpose().array();
    out.soft.middleCols(4 * j, 4) = y.transpose().array();
    for (int i = 0; i < count; ++i) {
      Eigen::Index k;
      noisy.col(i).maxCoeff(&k);
      hard.row(i)[j] = Outcome(k);
    }
  }
  return out;
}

namespace {

void backprop_stream(const std::vector<GruLayerParams>& params, const std::vector<ForwardTape::LayerStep>& steps,
                     MatrixXd dh, std::vector<MatrixXd>& carry, std::vector<GruLayerParams>& grads) {
  for (int l = int(params.size()) - 1; l >= 0; --l) {
    const MatrixXd total = dh + carry[l];
    MatrixXd dx, dhp;
    gru_backward(params[l], steps[l], total, grads[l], l > 0 ? &dx : nullptr, dhp);
    carry[l] = std::move(dhp);
    dh = std::move(dx);
  }
}

}  // namespace

DualStreamModel backward_logits(const DualStreamModel& model, const ForwardTape& tape, const ArrayXXd& d_logits) {
  const int length = tape.length_, n = tape.batch_, H = model.dims().hidden, layers = model.dims().layers;
  if (d_logits.rows() != n || d_logits.cols() != 4 * length)
    throw std::invalid_argument("backward: gradient shape does not match the tape");
  DualStreamModel g = model.zeros_like();
  std::vector<MatrixXd> carry_u(layers, MatrixXd::Zero(H, n)), carry_p;
  if (model.dims().dual_stream) carry_p.assign(layers, MatrixXd::Zero(H, n));
  for (int j = length - 1; j >= 0; --j) {
    const ForwardTape::SiteStep& s = tape.sites_[j];
    const MatrixXd dl = d_logits.middleCols(4 * j, 4).transpose().matrix();
    g.out_b += dl.rowwise().sum();
    g.out_W.noalias() += dl * s.fused.transpose();
    const MatrixXd dh = model.out_W.transpose() * dl;
    if (model.dims().dual_stream) {
      const auto gate = s.gate.array();
      const MatrixXd& h0 = s.uniform.back().h;
      const MatrixXd dpi = (dh.array() * gate).matrix();
      const MatrixXd da = (dh.array() * s.parity.back().h.array() * gate * (1.0 - gate)).matrix();
      g.gate_W.noalias() += da * h0.transpose();
      g.gate_b += da.rowwise().sum();
      MatrixXd du = dh;
      du.noalias() += model.gate_W.transpose() * da;
      backprop_stream(model.uniform, s.uniform, std::move(du), carry_u, g.uniform);
      backprop_stream(model.parity, s.parity, dpi, carry_p, g.parity);
    } else {
      backprop_stream(model.uniform, s.uniform, dh, carry_u, g.uniform);
    }
  }
  for (int l = 0; l < layers; ++l) {
    g.uniform_init[l] = carry_u[l].rowwise().sum();
    if (model.dims().dual_stream) g.parity_init[l] = carry_p[l].rowwise().sum();
  }
  return g;
}

DualStreamModel backward(const DualStreamModel& model, const GumbelSamples& samples, const ArrayXXd& d_soft) {
  const ArrayXXd& y = samples.soft;
  if (d_soft.rows() != y.rows() || d_soft.cols() != y.cols())
    throw std::invalid_argument("backward: gradient shape does not match the samples");
  ArrayXXd d_logits(y.rows(), y.cols());
  for (int j = 0; j < y.cols() / 4; ++j) {
    const auto yj = y.middleCols(4 * j, 4);
    const auto dj = d_soft.middleCols(4 * j, 4);
    const Eigen::ArrayXd inner = (yj * dj).rowwise().sum();
    d_logits.middleCols(4 * j, 4) = yj * (dj.colwise() - inner) / samples.temperature;
  }
  return backward_logits(model, samples.tape, d_logits);
}

}  // namespace povm
