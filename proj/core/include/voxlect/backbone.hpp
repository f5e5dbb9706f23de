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

#pragma once

// Frozen encoder adapters. A backbone turns a 16 kHz waveform into a
// LayerStack (front-end output plus every block's output) and exposes its
// feed-forward weights so low-rank adapters can be attached.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxlect/common.hpp"
#include "voxlect/tensor.hpp"

namespace voxlect {

/// Hidden states of one utterance: layers[0] is the front-end output and
/// layers[k] the k-th block output. Every layer is T x D.
struct LayerStack {
  std::vector<Matrix> layers;
  double frame_rate_hz = 0.0;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int num_frames() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().rows());
  }
  int dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().cols());
  }
  /// Throws on ragged shapes or fewer than two layers.
  void check() const;
};

/// W' = W + (alpha / rank) * B * A, with A: rank x d_in and B: d_out x rank.
struct LoraAdapter {
  int rank = 0;
  double alpha = 0.0;
  Matrix a;
  Matrix b;

  double scale() const { return alpha / rank; }
};

/// A frozen linear map y = W x + bias that may carry a LoRA adapter.
struct FeedForwardWeight {
  std::string name;
  Matrix weight;  // d_out x d_in
  Vector bias;    // d_out
  std::optional<LoraAdapter> lora;

  int d_in() const { return static_cast<int>(weight.cols()); }
  int d_out() const { return static_cast<int>(weight.rows()); }
  /// Rows of `x` are inputs; returns rows of outputs (base + adapter).
  Matrix apply(const Matrix& x) const;
};

struct LoraOptions {
  int rank = 64;
  double alpha = 64.0;  // scale alpha / rank == 1
  std::vector<std::string> targets;  // empty = every feed-forward matrix
  std::uint64_t seed = 0;
};

/// Opaque per-utterance activations kept for the backward pass.
struct BackboneCache {
  virtual ~BackboneCache() = default;
};

class Backbone {
 public:
  virtual ~Backbone() = default;

  /// Identifier sufficient to rebuild the frozen weights.
  virtual std::string id() const = 0;
  virtual int num_layers() const = 0;  // L + 1 stack entries
  virtual int dim() const = 0;
  virtual double frame_rate_hz() const = 0;
  /// Shortest waveform (in samples) that yields at least one frame.
  virtual int min_samples() const = 0;

  /// Inference. Throws when the waveform is shorter than min_samples().
  virtual LayerStack forward(std::span<const float> wave) const = 0;
  /// Same result as forward(), additionally filling `cache`.
  virtual LayerStack forward(std::span<const float> wave,
                             std::unique_ptr<BackboneCache>& cache) const = 0;
  /// Back-propagates d(loss)/d(stack) into gradients aligned with
  /// trainable_parameters().
  virtual std::vector<Matrix> backward(const BackboneCache& cache,
                                       const std::vector<Matrix>& d_stack)
      const = 0;

  virtual std::vector<std::string> feedforward_names() const = 0;
  virtual FeedForwardWeight& feedforward(const std::string& name) = 0;
  virtual const FeedForwardWeight& feedforward(
      const std::string& name) const = 0;

  /// LoRA factors in a stable order (A then B per adapted matrix).
  std::vector<NamedParameter> trainable_parameters();
  std::vector<ConstNamedParameter> trainable_parameters() const;

  /// Fingerprint of every frozen weight (never includes LoRA factors).
  virtual std::string base_weights_hash() const = 0;
};

/// Attaches LoRA adapters (A random, B zero) to the targeted feed-forward
/// matrices. Throws naming any target the backbone does not expose.
void apply_lora(Backbone& backbone, const LoraOptions& options);

struct MockBackboneConfig {
  int num_blocks = 4;  // L; the stack has L + 1 entries
  int dim = 32;
  int ffn_dim = 64;
  int num_mels = 40;
  double frame_rate_hz = 50.0;
  int window = 400;  // 25 ms at 16 kHz
  int fft_size = 512;
  std::uint64_t seed = 1234;

  /// "mock:L=4,D=32,F=64,M=40,R=50,W=400,N=512,seed=1234"
  std::string id() const;
  /// Inverse of id(); missing keys keep their defaults.
  static MockBackboneConfig parse(const std::string& id);
};

/// Deterministic stand-in encoder for desk-scale work: log-mel filterbank,
/// a fixed random projection to D, then residual feed-forward blocks
/// h_k = h_{k-1} + W2 gelu(W1 h_{k-1} + b1) + b2 with seeded weights.
/// Feed-forward matrices are named "blocks.<k>.ffn.fc1" / ".fc2".
std::unique_ptr<Backbone> mock_backbone(const MockBackboneConfig& config);

/// Builds a backbone from its id. Only "mock:..." ids are constructible here.
std::unique_ptr<Backbone> make_backbone(const std::string& id);

}  // namespace voxlect
