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

#include "voxlect/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace voxlect {

void LayerStack::check() const {
  if (layers.size() < 2) {
    throw Error("layer stack needs the front-end plus at least one block");
  }
  const auto t = layers.front().rows();
  const auto d = layers.front().cols();
  if (t < 1 || d < 1) throw Error("layer stack has empty layers");
  for (const auto& l : layers) {
    if (l.rows() != t || l.cols() != d) {
      throw Error("layer stack dimension mismatch");
    }
  }
}

Matrix FeedForwardWeight::apply(const Matrix& x) const {
  Matrix y = x * weight.transpose();
  y.rowwise() += bias.transpose();
  if (lora) y.noalias() += lora->scale() * ((x * lora->a.transpose()) * lora->b.transpose());
  return y;
}

std::vector<NamedParameter> Backbone::trainable_parameters() {
  std::vector<NamedParameter> out;
  for (const auto& name : feedforward_names()) {
    auto& ff = feedforward(name);
    if (!ff.lora) continue;
    out.push_back({name + ".lora_a", &ff.lora->a});
    out.push_back({name + ".lora_b", &ff.lora->b});
  }
  return out;
}

std::vector<ConstNamedParameter> Backbone::trainable_parameters() const {
  std::vector<ConstNamedParameter> out;
  for (const auto& name : feedforward_names()) {
    const auto& ff = feedforward(name);
    if (!ff.lora) continue;
    out.push_back({name + ".lora_a", &ff.lora->a});
    out.push_back({name + ".lora_b", &ff.lora->b});
  }
  return out;
}

void apply_lora(Backbone& backbone, const LoraOptions& options) {
  if (options.rank < 1) throw Error("LoRA rank must be >= 1");
  std::vector<std::string> targets = options.targets;
  if (targets.empty()) targets = backbone.feedforward_names();
  // Resolve every name first so a bad target leaves the backbone untouched.
  std::vector<FeedForwardWeight*> resolved;
  for (const auto& t : targets) resolved.push_back(&backbone.feedforward(t));
  for (auto* ff : resolved) {
    Fnv1a h;
    h.update(&options.seed, sizeof(options.seed));
    h.update(ff->name);
    std::mt19937_64 rng(h.digest());
    const double bound = 1.0 / std::sqrt(static_cast<double>(ff->d_in()));
    std::uniform_real_distribution<double> u(-bound, bound);
    LoraAdapter lora;
    lora.rank = options.rank;
    lora.alpha = options.alpha;
    lora.a.resize(options.rank, ff->d_in());
    for (Eigen::Index i = 0; i < lora.a.size(); ++i) lora.a.data()[i] = u(rng);
    lora.b = Matrix::Zero(ff->d_out(), options.rank);
    ff->lora = std::move(lora);
  }
}

std::string MockBackboneConfig::id() const {
  std::ostringstream ss;
  ss << "mock:L=" << num_blocks << ",D=" << dim << ",F=" << ffn_dim
     << ",M=" << num_mels << ",R=" << frame_rate_hz << ",W=" << window
     << ",N=" << fft_size << ",seed=" << seed;
  return ss.str();
}

MockBackboneConfig MockBackboneConfig::parse(const std::string& id) {
  if (id.rfind("mock", 0) != 0) {
    throw Error("not a mock backbone id: " + id);
  }
  MockBackboneConfig c;
  const auto colon = id.find(':');
  if (colon == std::string::npos) return c;
  std::stringstream ss(id.substr(colon + 1));
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("malformed backbone id: " + id);
    const std::string k = kv.substr(0, eq);
    const std::string v = kv.substr(eq + 1);
    try {
      if (k == "L") c.num_blocks = std::stoi(v);
      else if (k == "D") c.dim = std::stoi(v);
      else if (k == "F") c.ffn_dim = std::stoi(v);
      else if (k == "M") c.num_mels = std::stoi(v);
      else if (k == "R") c.frame_rate_hz = std::stod(v);
      else if (k == "W") c.window = std::stoi(v);
      else if (k == "N") c.fft_size = std::stoi(v);
      else if (k == "seed") c.seed = std::stoull(v);
      else throw Error("unknown key '" + k + "' in backbone id " + id);
    } catch (const std::logic_error&) {
      throw Error("malformed value for '" + k + "' in backbone id " + id);
    }
  }
  return c;
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

struct MockCache : BackboneCache {
  std::vector<Matrix> x;    // block inputs h_{k-1}
  std::vector<Matrix> xa1;  // x * A1^T (empty without LoRA)
  std::vector<Matrix> u;    // fc1 pre-activation
  std::vector<Matrix> g;    // gelu(u)
  std::vector<Matrix> ga2;  // g * A2^T
};

class MockBackbone final : public Backbone {
 public:
  explicit MockBackbone(const MockBackboneConfig& c) : cfg_(c) {
    if (c.num_blocks < 1 || c.dim < 1 || c.ffn_dim < 1 || c.num_mels < 1 ||
        c.window < 1 || c.fft_size < c.window || !(c.frame_rate_hz > 0)) {
      throw Error("invalid mock backbone configuration: " + c.id());
    }
    hop_ = static_cast<int>(std::lround(kTargetSampleRate / c.frame_rate_hz));
    if (hop_ < 1) throw Error("frame rate too high for 16 kHz input");
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto randn = [&](int r, int k, double scale) {
      Matrix m(r, k);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * normal(rng);
      return m;
    };
    proj_ = randn(c.dim, c.num_mels, 1.0 / std::sqrt(c.num_mels));
    for (int k = 1; k <= c.num_blocks; ++k) {
      FeedForwardWeight fc1, fc2;
      fc1.name = "blocks." + std::to_string(k) + ".ffn.fc1";
      fc1.weight = randn(c.ffn_dim, c.dim, 1.0 / std::sqrt(c.dim));
      fc1.bias = randn(c.ffn_dim, 1, 0.1).col(0);
      fc2.name = "blocks." + std::to_string(k) + ".ffn.fc2";
      fc2.weight = randn(c.dim, c.ffn_dim, 0.5 / std::sqrt(c.ffn_dim));
      fc2.bias = randn(c.dim, 1, 0.1).col(0);
      names_.push_back(fc1.name);
      names_.push_back(fc2.name);
      ffn_.push_back(std::move(fc1));
      ffn_.push_back(std::move(fc2));
    }
    window_.resize(c.window);
    for (int i = 0; i < c.window; ++i) {
      window_[static_cast<std::size_t>(i)] =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / c.window);
    }
    const int bins = c.fft_size / 2 + 1;
    mel_ = Matrix::Zero(c.num_mels, bins);
    const double lo = hz_to_mel(20.0);
    const double hi = hz_to_mel(kTargetSampleRate / 2.0);
    std::vector<double> edges(static_cast<std::size_t>(c.num_mels) + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(edges.size() - 1));
    }
    for (int m = 0; m < c.num_mels; ++m) {
      const double f0 = edges[static_cast<std::size_t>(m)];
      const double f1 = edges[static_cast<std::size_t>(m) + 1];
      const double f2 = edges[static_cast<std::size_t>(m) + 2];
      for (int b = 0; b < bins; ++b) {
        const double f = static_cast<double>(b) * kTargetSampleRate / c.fft_size;
        double w = 0.0;
        if (f > f0 && f <= f1) w = (f - f0) / (f1 - f0);
        else if (f > f1 && f < f2) w = (f2 - f) / (f2 - f1);
        mel_(m, b) = w;
      }
    }
  }

  std::string id() const override { return cfg_.id(); }
  int num_layers() const override { return cfg_.num_blocks + 1; }
  int dim() const override { return cfg_.dim; }
  double frame_rate_hz() const override {
    return static_cast<double>(kTargetSampleRate) / hop_;
  }
  int min_samples() const override { return cfg_.window; }

  LayerStack forward(std::span<const float> wave) const override {
    return run(wave, nullptr);
  }

  LayerStack forward(std::span<const float> wave,
                     std::unique_ptr<BackboneCache>& cache) const override {
    auto c = std::make_unique<MockCache>();
    LayerStack s = run(wave, c.get());
    cache = std::move(c);
    return s;
  }

  std::vector<Matrix> backward(const BackboneCache& base,
                               const std::vector<Matrix>& d_stack) const override {
    const auto& cache = dynamic_cast<const MockCache&>(base);
    const int blocks = cfg_.num_blocks;
    if (static_cast<int>(d_stack.size()) != blocks + 1) {
      throw Error("backward: stack gradient has wrong number of layers");
    }
    // Gradient slots follow trainable_parameters(): per adapted matrix, A, B.
    std::map<std::string, std::pair<Matrix, Matrix>> grads;
    Matrix dh = d_stack[static_cast<std::size_t>(blocks)];
    for (int k = blocks; k >= 1; --k) {
      const auto i = static_cast<std::size_t>(k - 1);
      const FeedForwardWeight& fc1 = ffn_[2 * i];
      const FeedForwardWeight& fc2 = ffn_[2 * i + 1];
      const Matrix& x = cache.x[i];
      const Matrix& g = cache.g[i];
      const Matrix& dv = dh;
      Matrix dg = dv * fc2.weight;
      if (fc2.lora) {
        const double s = fc2.lora->scale();
        Matrix dga2 = s * (dv * fc2.lora->b);
        grads[fc2.name] = {dga2.transpose() * g,
                           s * (dv.transpose() * cache.ga2[i])};
        dg.noalias() += dga2 * fc2.lora->a;
      }
      Matrix du = dg.cwiseProduct(gelu_grad(cache.u[i]));
      Matrix dx = du * fc1.weight;
      if (fc1.lora) {
        const double s = fc1.lora->scale();
        Matrix dxa1 = s * (du * fc1.lora->b);
        grads[fc1.name] = {dxa1.transpose() * x,
                           s * (du.transpose() * cache.xa1[i])};
        dx.noalias() += dxa1 * fc1.lora->a;
      }
      dh = d_stack[i] + dx + dv;
    }
    std::vector<Matrix> out;
    for (const auto& name : names_) {
      auto it = grads.find(name);
      if (it == grads.end()) continue;
      out.push_back(std::move(it->second.first));
      out.push_back(std::move(it->second.second));
    }
    return out;
  }

  std::vector<std::string> feedforward_names() const override { return names_; }

  FeedForwardWeight& feedforward(const std::string& name) override {
    return const_cast<FeedForwardWeight&>(
        static_cast<const MockBackbone&>(*this).feedforward(name));
  }

  const FeedForwardWeight& feedforward(const std::string& name) const override {
    for (const auto& ff : ffn_) {
      if (ff.name == name) return ff;
    }
    throw Error("backbone has no feed-forward layer '" + name + "'");
  }

  std::string base_weights_hash() const override {
    Fnv1a h;
    auto put = [&](const auto& m) {
      h.update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    };
    put(proj_);
    for (const auto& ff : ffn_) {
      put(ff.weight);
      put(ff.bias);
    }
    return h.hex();
  }

 private:
  Matrix log_mel(std::span<const float> wave) const {
    if (static_cast<int>(wave.size()) < min_samples()) {
      throw Error("waveform of " + std::to_string(wave.size()) +
                  " samples is shorter than the backbone's minimum receptive "
                  "field of " + std::to_string(min_samples()) + " samples");
    }
    const int frames = static_cast<int>(wave.size()) / hop_;
    const int bins = cfg_.fft_size / 2 + 1;
    Matrix power(frames, bins);
    Eigen::FFT<double> fft;
    std::vector<double> buf(static_cast<std::size_t>(cfg_.fft_size));
    std::vector<std::complex<double>> spectrum;
    for (int t = 0; t < frames; ++t) {
      std::fill(buf.begin(), buf.end(), 0.0);
      const std::size_t start = static_cast<std::size_t>(t) * hop_;
      for (int i = 0; i < cfg_.window; ++i) {
        const std::size_t j = start + static_cast<std::size_t>(i);
        if (j >= wave.size()) break;
        buf[static_cast<std::size_t>(i)] = wave[j] * window_[static_cast<std::size_t>(i)];
      }
      fft.fwd(spectrum, buf);
      for (int b = 0; b < bins; ++b) {
        power(t, b) = std::norm(spectrum[static_cast<std::size_t>(b)]);
      }
    }
    Matrix mel = power * mel_.transpose();
    // Energy floor 40 dB below the utterance's mean band energy.
    const double floor = std::max(1e-10, 1e-4 * mel.mean());
    Matrix feats = mel.array().max(floor).log().matrix();
    // Scalar normalisation keeps the spectral shape and removes gain.
    const double mean = feats.mean();
    const double var = (feats.array() - mean).square().mean();
    feats = ((feats.array() - mean) / std::sqrt(var + 1e-8)).matrix();
    return feats;
  }

  LayerStack run(std::span<const float> wave, MockCache* cache) const {
    LayerStack s;
    s.frame_rate_hz = frame_rate_hz();
    s.layers.reserve(static_cast<std::size_t>(cfg_.num_blocks) + 1);
    s.layers.push_back(log_mel(wave) * proj_.transpose());
    for (int k = 1; k <= cfg_.num_blocks; ++k) {
      const auto i = static_cast<std::size_t>(k - 1);
      const FeedForwardWeight& fc1 = ffn_[2 * i];
      const FeedForwardWeight& fc2 = ffn_[2 * i + 1];
      const Matrix& x = s.layers.back();
      Matrix u = x * fc1.weight.transpose();
      u.rowwise() += fc1.bias.transpose();
      Matrix xa1;
      if (fc1.lora) {
        xa1 = x * fc1.lora->a.transpose();
        u.noalias() += fc1.lora->scale() * (xa1 * fc1.lora->b.transpose());
      }
      Matrix g = gelu(u);
      Matrix v = g * fc2.weight.transpose();
      v.rowwise() += fc2.bias.transpose();
      Matrix ga2;
      if (fc2.lora) {
        ga2 = g * fc2.lora->a.transpose();
        v.noalias() += fc2.lora->scale() * (ga2 * fc2.lora->b.transpose());
      }
      Matrix h = x + v;
      if (cache) {
        cache->x.push_back(x);
        cache->xa1.push_back(std::move(xa1));
        cache->u.push_back(std::move(u));
        cache->g.push_back(std::move(g));
        cache->ga2.push_back(std::move(ga2));
      }
      s.layers.push_back(std::move(h));
    }
    return s;
  }

  MockBackboneConfig cfg_;
  int hop_ = 320;
  Matrix proj_;
  std::vector<FeedForwardWeight> ffn_;
  std::vector<std::string> names_;
  std::vector<double> window_;
  Matrix mel_;
};

}  // namespace

std::unique_ptr<Backbone> mock_backbone(const MockBackboneConfig& config) {
  return std::make_unique<MockBackbone>(config);
}

std::unique_ptr<Backbone> make_backbone(const std::string& id) {
  if (id.rfind("mock", 0) == 0) {
    return mock_backbone(MockBackboneConfig::parse(id));
  }
  throw Error("backbone '" + id +
              "' is not available in this build (only mock:* backbones can "
              "be constructed)");
}

}  // namespace voxlect
