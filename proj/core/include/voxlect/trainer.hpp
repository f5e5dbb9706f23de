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

// Fine-tuning of probe and LoRA parameters, and evaluation of checkpoints.
//
// Run configuration is a flat text file of `key = value` lines; `#` starts a
// comment. Recognised keys:
//
//   group, backbone, manifest, output_dir, seed, learning_rate, epochs,
//   batch_size, validation_fraction, test_fraction, augment,
//   aug.noise_prob, aug.snr_low_db, aug.snr_high_db, aug.mask_prob,
//   aug.mask_ratio_low, aug.mask_ratio_high, aug.mask_spans,
//   aug.stretch_prob, aug.stretch_low, aug.stretch_high, aug.polarity_prob,
//   lora.rank, lora.alpha, lora.targets, probe.conv_channels,
//   probe.head_hidden, probe.unconstrained_layer_weights,
//   optim.beta1, optim.beta2, optim.eps, optim.weight_decay, optim.grad_clip,
//   max_duration_s, truncate
//
// List values are comma separated.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "voxlect/augment.hpp"
#include "voxlect/corpus.hpp"
#include "voxlect/metrics.hpp"
#include "voxlect/model.hpp"
#include "voxlect/taxonomy.hpp"

namespace voxlect {

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  double grad_clip = 0.0;  // global L2 norm; 0 disables
};

struct RunConfig {
  std::string group;
  std::string backbone_id = MockBackboneConfig{}.id();
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  double learning_rate = 5e-4;
  std::optional<int> epochs;      // unset: per-group schedule
  std::optional<int> batch_size;  // unset: per-backbone default
  double validation_fraction = 0.1;
  double test_fraction = 0.2;
  bool augment = true;
  AugmentationPolicy augmentation;
  int lora_rank = 64;
  std::optional<double> lora_alpha;  // unset: equal to the rank
  std::vector<std::string> lora_targets;
  std::vector<int> conv_channels;
  std::vector<int> head_hidden;
  bool unconstrained_layer_weights = false;
  OptimizerConfig optimizer;
  double max_duration_s = kMaxDurationS;
  bool truncate = true;

  LanguageGroup language_group() const { return parse_group(group); }
  /// 5 for thai and arabic, 15 otherwise, unless set explicitly.
  int resolved_epochs() const;
  /// 6 for MMS-LID-256 backbones, 16 otherwise, unless set explicitly.
  int resolved_batch_size() const;
  LoraOptions lora_options() const;
  ProbeConfig probe_config() const;
  PrepareOptions prepare_options() const;

  /// Throws Error naming the first invalid field.
  void validate() const;

  /// Fully resolved settings, defaults included.
  nlohmann::json to_json() const;
};

/// The two learning rates of the default grid.
inline constexpr double kLearningRateGrid[] = {1e-4, 5e-4};

/// Applies one `key = value` setting. Unknown keys and malformed values throw.
void set_config_value(RunConfig& cfg, const std::string& key,
                      const std::string& value);

/// Relative `manifest` and `output_dir` resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir = {});

/// Throws "config not found: <path>" when the file does not exist.
RunConfig load_run_config(const std::filesystem::path& path);

/// Adam with decoupled weight decay and optional global-norm clipping.
class AdamW {
 public:
  AdamW(double learning_rate, const OptimizerConfig& config);

  /// `grads` is aligned with `params`.
  void step(std::span<const NamedParameter> params,
            std::span<const Matrix> grads);

  std::int64_t steps() const { return t_; }

 private:
  double lr_;
  OptimizerConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

/// Reads the manifest, ingests it against the taxonomy, subsamples datasets
/// named in default_subsample_policy() and assigns speaker-disjoint splits
/// to datasets that have none.
IngestResult prepare_corpus(const RunConfig& cfg, const Taxonomy& taxonomy);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
  double val_accuracy = 0.0;
  int steps = 0;
  bool best = false;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  double best_val_macro_f1 = 0.0;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::filesystem::path log_path;
  int n_train = 0;
  int n_validation = 0;
};

/// Trains on the records whose split is train, holding out
/// validation_fraction of their speakers for model selection. Writes
/// <output_dir>/train_log.jsonl and the checkpoints <output_dir>/best and
/// <output_dir>/last. Test records are never read.
TrainResult train(const RunConfig& cfg, std::span<const ManifestRecord> corpus,
                  const Taxonomy& taxonomy);

struct EvalOptions {
  PrepareOptions prepare;
  // Evaluation-time corruption: Gaussian noise at this SNR.
  std::optional<double> snr_db;
  std::uint64_t noise_seed = 0;
  int batch_size = 16;
};

struct EvalResult {
  std::vector<ScoredUtterance> predictions;
  EvalReport report;
};

/// Scores every record without augmentation. Refuses when the model was
/// trained against another taxonomy version.
EvalResult evaluate(const DialectClassifier& model,
                    std::span<const ManifestRecord> records,
                    const Taxonomy& taxonomy, const EvalOptions& options = {});

/// Records whose split equals `split`.
std::vector<ManifestRecord> select_split(std::span<const ManifestRecord> records,
                                         Split split);

}  // namespace voxlect
