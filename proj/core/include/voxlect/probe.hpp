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

// Classifier on top of a frozen encoder:
//
//   stack (L+1 layers, T x D) --weighted average--> T x D
//     --pointwise conv, gelu, pointwise conv, gelu, pointwise conv--> T x C
//     --mean over T--> C --fc, gelu, fc--> K logits
//
// Layer weights are softmax(logits) unless `unconstrained_layer_weights`.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "voxlect/backbone.hpp"
#include "voxlect/tensor.hpp"

namespace voxlect {

struct ProbeConfig {
  int num_layers = 5;  // L + 1
  int feature_dim = 32;
  std::vector<int> conv_channels;  // empty -> {D, D, 256}
  std::vector<int> head_hidden;    // empty -> {256}
  int num_classes = 0;
  bool unconstrained_layer_weights = false;
  std::uint64_t seed = 0;

  /// Fills the documented defaults and checks ranges.
  ProbeConfig resolved() const;
};

/// Output[t] = sum_k weights[k] * layers[k][t]. Throws on dimension mismatch.
Matrix aggregate_layers(const LayerStack& stack, const Vector& weights);

struct Prediction {
  std::string utterance_id;
  std::vector<double> probabilities;  // canonical class order
  int argmax = -1;
  double max_probability = 0.0;

  static Prediction from_logits(const Vector& logits, std::string id = {});
};

class Probe {
 public:
  Probe() = default;
  explicit Probe(const ProbeConfig& config);

  bool initialized() const { return !conv_w_.empty(); }
  const ProbeConfig& config() const { return cfg_; }

  /// Normalised (or raw, if unconstrained) layer weights.
  Vector layer_weights() const;

  Vector forward(const LayerStack& stack) const;

  /// Pads to the longest utterance and masks padding out of the mean pool.
  std::vector<Vector> forward_batch(std::span<const LayerStack> stacks) const;

  struct Gradients {
    double loss = 0.0;
    Vector logits;
    std::vector<Matrix> params;  // aligned with parameters()
    std::vector<Matrix> stack;   // d loss / d layers[k]
  };

  /// Cross-entropy against `label` and its gradients.
  Gradients loss_and_gradients(const LayerStack& stack, int label) const;

  std::vector<NamedParameter> parameters();
  std::vector<ConstNamedParameter> parameters() const;

 private:
  struct Activations;
  Activations run(const Matrix& agg) const;
  Matrix pooled_head_input(const Matrix& agg) const;
  Vector head(const Vector& pooled) const;
  void require_initialized() const;

  ProbeConfig cfg_;
  Matrix layer_logits_;  // 1 x (L+1)
  std::vector<Matrix> conv_w_, conv_b_;  // out x in, 1 x out
  std::vector<Matrix> head_w_, head_b_;
};

}  // namespace voxlect
