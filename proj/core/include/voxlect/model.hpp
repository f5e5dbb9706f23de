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

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "voxlect/backbone.hpp"
#include "voxlect/probe.hpp"
#include "voxlect/taxonomy.hpp"

namespace voxlect {

/// Backbone (frozen, LoRA-adapted) plus probe, bound to one language group.
class DialectClassifier {
 public:
  /// Attaches LoRA to `backbone` and builds a freshly initialised probe whose
  /// class count comes from the taxonomy.
  DialectClassifier(const Taxonomy& taxonomy, LanguageGroup group,
                    std::unique_ptr<Backbone> backbone,
                    const LoraOptions& lora, ProbeConfig probe);

  DialectClassifier(DialectClassifier&&) noexcept = default;
  DialectClassifier& operator=(DialectClassifier&&) noexcept = default;

  LanguageGroup group() const { return group_; }
  const std::string& taxonomy_version() const { return taxonomy_version_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int num_classes() const { return static_cast<int>(labels_.size()); }
  const LoraOptions& lora_options() const { return lora_; }

  Backbone& backbone() { return *backbone_; }
  const Backbone& backbone() const { return *backbone_; }
  Probe& probe() { return probe_; }
  const Probe& probe() const { return probe_; }

  Vector logits(std::span<const float> wave) const;
  Prediction predict_proba(std::span<const float> wave,
                           std::string utterance_id = {}) const;
  /// Batched inference through Probe::forward_batch.
  std::vector<Prediction> predict_batch(
      std::span<const std::span<const float>> waves,
      std::span<const std::string> ids) const;

  /// Cross-entropy loss; `grads` is resized to match trainable_parameters().
  double loss_and_gradients(std::span<const float> wave, int label,
                            std::vector<Matrix>& grads) const;

  /// Probe parameters followed by LoRA factors.
  std::vector<NamedParameter> trainable_parameters();
  std::vector<ConstNamedParameter> trainable_parameters() const;

  /// Writes <dir>/checkpoint.json atomically. `extra` is stored verbatim.
  void save(const std::filesystem::path& dir,
            const nlohmann::json& extra = nlohmann::json::object()) const;

  /// Refuses checkpoints written against another taxonomy version or whose
  /// rebuilt backbone does not hash to the recorded base weights.
  static DialectClassifier load(const std::filesystem::path& dir,
                                const Taxonomy& taxonomy);

  /// Reads the JSON header without rebuilding the model.
  static nlohmann::json read_header(const std::filesystem::path& dir);

 private:
  DialectClassifier() = default;

  LanguageGroup group_ = LanguageGroup::english;
  std::string taxonomy_version_;
  std::vector<std::string> labels_;
  LoraOptions lora_;
  std::unique_ptr<Backbone> backbone_;
  Probe probe_;
};

}  // namespace voxlect
