// Copyright 2026  The Voxlect Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "voxlect/probe.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace voxlect {

ProbeConfig ProbeConfig::resolved() const {
  ProbeConfig c = *this;
  if (c.conv_channels.empty()) c.conv_channels = {c.feature_dim, c.feature_dim, 256};
  if (c.head_hidden.empty()) c.head_hidden = {256};
  if (c.num_layers < 2) throw Error("probe needs at least 2 stack layers");
  if (c.feature_dim < 1) throw Error("probe feature_dim must be positive");
  if (c.num_classes < 2) throw Error("probe needs at least 2 classes");
  for (int w : c.conv_channels) {
    if (w < 1) throw Error("conv channel widths must be positive");
  }
  for (int w : c.head_hidden) {
    if (w < 1) throw Error("head widths must be positive");
  }
  return c;
}

Matrix aggregate_layers(const LayerStack& stack, const Vector& weights) {
  stack.check();
  if (weights.size() != stack.num_layers()) {
    throw Error("layer weight count " + std::to_string(weights.size()) +
                " does not match stack depth " +
                std::to_string(stack.num_layers()));
  }
  Matrix out = weights(0) * stack.layers[0];
  for (int k = 1; k < stack.num_layers(); ++k) {
    out.noalias() += weights(k) * stack.layers[static_cast<std::size_t>(k)];
  }
  return out;
}

Prediction Prediction::from_logits(const Vector& logits, std::string id) {
  Prediction p;
  p.utterance_id = std::move(id);
  const Vector prob = softmax(logits);
  p.probabilities.assign(prob.data(), prob.data() + prob.size());
  Eigen::Index arg = 0;
  p.max_probability = prob.maxCoeff(&arg);
  p.argmax = static_cast<int>(arg);
  return p;
}

struct Probe::Activations {
  std::vector<Matrix> z;  // conv pre-activations
  std::vector<Matrix> a;  // conv outputs (a.back() is the last conv output)
  Vector pooled;
  std::vector<Vector> q;  // head pre-activations
  std::vector<Vector> r;  // head outputs
  Vector logits;
};

Probe::Probe(const ProbeConfig& config) : cfg_(config.resolved()) {
  std::mt19937_64 rng(cfg_.seed);
  auto uniform_init = [&](int rows, int cols, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  layer_logits_ = cfg_.unconstrained_layer_weights
                      ? Matrix::Constant(1, cfg_.num_layers, 1.0 / cfg_.num_layers)
                      : Matrix::Zero(1, cfg_.num_layers);
  int in = cfg_.feature_dim;
  for (int out : cfg_.conv_channels) {
    conv_w_.push_back(uniform_init(out, in, in));
    conv_b_.push_back(uniform_init(1, out, in));
    in = out;
  }
  std::vector<int> widths = cfg_.head_hidden;
  widths.push_back(cfg_.num_classes);
  for (int out : widths) {
    head_w_.push_back(uniform_init(out, in, in));
    head_b_.push_back(uniform_init(1, out, in));
    in = out;
  }
}

void Probe::require_initialized() const {
  if (!initialized()) throw Error("probe state is not initialized");
}

Vector Probe::layer_weights() const {
  require_initialized();
  const Vector logits = layer_logits_.row(0).transpose();
  return cfg_.unconstrained_layer_weights ? logits : softmax(logits);
}

Probe::Activations Probe::run(const Matrix& agg) const {
  Activations act;
  const std::size_t n = conv_w_.size();
  const Matrix* in = &agg;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix z = (*in) * conv_w_[i].transpose();
    z.rowwise() += conv_b_[i].row(0);
    act.a.push_back(i + 1 < n ? gelu(z) : z);
    act.z.push_back(std::move(z));
    in = &act.a.back();
  }
  act.pooled = act.a.back().colwise().mean().transpose();
  const std::size_t m = head_w_.size();
  Vector x = act.pooled;
  for (std::size_t j = 0; j < m; ++j) {
    Vector q = head_w_[j] * x + head_b_[j].row(0).transpose();
    Vector r = j + 1 < m ? Vector(q.unaryExpr([](double v) { return gelu(v); }))
                         : q;
    act.q.push_back(q);
    act.r.push_back(r);
    x = r;
  }
  act.logits = x;
  return act;
}

Vector Probe::head(const Vector& pooled) const {
  Vector x = pooled;
  for (std::size_t j = 0; j < head_w_.size(); ++j) {
    Vector q = head_w_[j] * x + head_b_[j].row(0).transpose();
    x = j + 1 < head_w_.size() ? Vector(q.unaryExpr([](double v) { return gelu(v); }))
                               : q;
  }
  return x;
}

Vector Probe::forward(const LayerStack& stack) const {
  require_initialized();
  if (stack.num_layers() != cfg_.num_layers || stack.dim() != cfg_.feature_dim) {
    throw Error("layer stack shape does not match probe configuration");
  }
  return run(aggregate_layers(stack, layer_weights())).logits;
}

std::vector<Vector> Probe::forward_batch(
    std::span<const LayerStack> stacks) const {
  require_initialized();
  if (stacks.empty()) return {};
  int t_max = 0;
  for (const auto& s : stacks) {
    s.check();
    if (s.num_layers() != cfg_.num_layers || s.dim() != cfg_.feature_dim) {
      throw Error("layer stack shape does not match probe configuration");
    }
    t_max = std::max(t_max, s.num_frames());
  }
  const auto batch = static_cast<Eigen::Index>(stacks.size());
  const Vector w = layer_weights();
  // Padded rows are zero on input; whatever the conv stack makes of them is
  // excluded by the masked mean below.
  Matrix agg = Matrix::Zero(batch * t_max, cfg_.feature_dim);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& s = stacks[static_cast<std::size_t>(b)];
    agg.middleRows(b * t_max, s.num_frames()) = aggregate_layers(s, w);
  }
  Matrix x = agg;
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    Matrix z = x * conv_w_[i].transpose();
    z.rowwise() += conv_b_[i].row(0);
    x = i + 1 < conv_w_.size() ? gelu(z) : z;
  }
  std::vector<Vector> out;
  out.reserve(stacks.size());
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int t = stacks[static_cast<std::size_t>(b)].num_frames();
    const Vector pooled = x.middleRows(b * t_max, t).colwise().mean().transpose();
    out.push_back(head(pooled));
  }
  return out;
}

Probe::Gradients Probe::loss_and_gradients(const LayerStack& stack,
                                           int label) const {
  require_initialized();
  if (label < 0 || label >= cfg_.num_classes) {
    throw Error("label index out of range");
  }
  if (stack.num_layers() != cfg_.num_layers || stack.dim() != cfg_.feature_dim) {
    throw Error("layer stack shape does not match probe configuration");
  }
  const Vector w = layer_weights();
  const Matrix agg = aggregate_layers(stack, w);
  const Activations act = run(agg);

  Gradients g;
  g.logits = act.logits;
  const double m = act.logits.maxCoeff();
  const double lse = m + std::log((act.logits.array() - m).exp().sum());
  g.loss = lse - act.logits(label);

  Vector d = softmax(act.logits);
  d(label) -= 1.0;

  const std::size_t nh = head_w_.size();
  std::vector<Matrix> d_head_w(nh), d_head_b(nh);
  for (std::size_t j = nh; j-- > 0;) {
    const Vector& x = j == 0 ? act.pooled : act.r[j - 1];
    d_head_w[j] = d * x.transpose();
    d_head_b[j] = d.transpose();
    Vector dx = head_w_[j].transpose() * d;
    if (j > 0) {
      dx = dx.cwiseProduct(act.q[j - 1].unaryExpr([](double v) { return gelu_grad(v); }));
    }
    d = dx;
  }
  // d is now d loss / d pooled.
  const std::size_t nc = conv_w_.size();
  const auto frames = agg.rows();
  std::vector<Matrix> d_conv_w(nc), d_conv_b(nc);
  Matrix dz = Matrix::Zero(frames, d.size());
  dz.rowwise() = d.transpose() / static_cast<double>(frames);
  for (std::size_t i = nc; i-- > 0;) {
    const Matrix& x = i == 0 ? agg : act.a[i - 1];
    d_conv_w[i] = dz.transpose() * x;
    d_conv_b[i] = dz.colwise().sum();
    Matrix dx = dz * conv_w_[i];
    if (i > 0) dx = dx.cwiseProduct(gelu_grad(act.z[i - 1]));
    dz = std::move(dx);
  }
  // dz is now d loss / d agg.
  Vector dw(cfg_.num_layers);
  g.stack.resize(static_cast<std::size_t>(cfg_.num_layers));
  for (int k = 0; k < cfg_.num_layers; ++k) {
    const auto& h = stack.layers[static_cast<std::size_t>(k)];
    dw(k) = h.cwiseProduct(dz).sum();
    g.stack[static_cast<std::size_t>(k)] = w(k) * dz;
  }
  Vector d_logits_w = cfg_.unconstrained_layer_weights
                          ? dw
                          : Vector(w.cwiseProduct((dw.array() - w.dot(dw)).matrix()));

  g.params.push_back(d_logits_w.transpose());
  for (std::size_t i = 0; i < nc; ++i) {
    g.params.push_back(std::move(d_conv_w[i]));
    g.params.push_back(std::move(d_conv_b[i]));
  }
  for (std::size_t j = 0; j < nh; ++j) {
    g.params.push_back(std::move(d_head_w[j]));
    g.params.push_back(std::move(d_head_b[j]));
  }
  return g;
}

std::vector<NamedParameter> Probe::parameters() {
  std::vector<NamedParameter> out;
  out.push_back({"probe.layer_logits", &layer_logits_});
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    out.push_back({"probe.conv." + std::to_string(i) + ".weight", &conv_w_[i]});
    out.push_back({"probe.conv." + std::to_string(i) + ".bias", &conv_b_[i]});
  }
  for (std::size_t j = 0; j < head_w_.size(); ++j) {
    out.push_back({"probe.head." + std::to_string(j) + ".weight", &head_w_[j]});
    out.push_back({"probe.head." + std::to_string(j) + ".bias", &head_b_[j]});
  }
  return out;
}

std::vector<ConstNamedParameter> Probe::parameters() const {
  std::vector<ConstNamedParameter> out;
  for (const auto& p : const_cast<Probe*>(this)->parameters()) {
    out.push_back({p.name, p.value});
  }
  return out;
}

}  // namespace voxlect
