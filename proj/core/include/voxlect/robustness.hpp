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

// Evaluation under additive noise and by utterance length, and paired
// significance testing between two models.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "voxlect/metrics.hpp"
#include "voxlect/model.hpp"
#include "voxlect/trainer.hpp"

namespace voxlect {

inline constexpr double kDefaultSnrLevelsDb[] = {25.0, 15.0, 5.0};
inline constexpr double kDefaultLengthThresholdS = 6.0;

/// "clean", or "snr<level>" such as "snr25".
std::string condition_name(std::optional<double> snr_db);

struct NoiseLevelResult {
  std::string condition;
  std::optional<double> snr_db;  // nullopt for clean
  EvalResult eval;
  double delta_macro_f1 = 0.0;     // F1(level) - F1(clean)
  double relative_change = 0.0;    // delta / F1(clean)
};

/// Clean evaluation followed by one evaluation per SNR level. Noise is drawn
/// from the "eval-noise" stream of `options.noise_seed`, never from the
/// training augmentation streams.
std::vector<NoiseLevelResult> noise_sweep(
    const DialectClassifier& model, std::span<const ManifestRecord> records,
    const Taxonomy& taxonomy,
    std::span<const double> snr_levels_db = kDefaultSnrLevelsDb,
    const EvalOptions& options = {});

struct LengthStrata {
  double threshold_s = kDefaultLengthThresholdS;
  std::vector<ScoredUtterance> short_rows;  // duration <= threshold
  std::vector<ScoredUtterance> long_rows;   // duration > threshold
  std::optional<EvalReport> short_report;   // absent when the stratum is empty
  std::optional<EvalReport> long_report;
};

/// Partitions scored utterances by duration and reports each stratum.
LengthStrata length_stratified_eval(std::span<const ScoredUtterance> rows,
                                    const std::vector<std::string>& class_names,
                                    const std::string& group,
                                    double threshold_s = kDefaultLengthThresholdS);

/// Evaluates `records` and stratifies the predictions.
LengthStrata length_stratified_eval(const DialectClassifier& model,
                                    std::span<const ManifestRecord> records,
                                    const Taxonomy& taxonomy,
                                    double threshold_s = kDefaultLengthThresholdS,
                                    const EvalOptions& options = {});

/// Per-utterance predictions of one model under one condition.
struct ConditionDump {
  std::string condition;
  std::vector<ScoredUtterance> rows;
};

struct BootstrapOptions {
  int resamples = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
};

struct ConditionComparison {
  std::string condition;
  double macro_f1_a = 0.0;
  double macro_f1_b = 0.0;
  double score_delta = 0.0;  // A - B
  double p_value = 1.0;
  bool significant = false;
  // Relative change against each model's own clean baseline, and A - B.
  double relative_change_a = 0.0;
  double relative_change_b = 0.0;
  double relative_delta = 0.0;
  double relative_p_value = 1.0;
  bool relative_significant = false;
};

/// Paired bootstrap over utterances with Macro-F1 as the statistic. The
/// baseline is the condition named "clean", else the first one. Both models
/// must cover identical conditions and utterance sets; a condition whose
/// utterance set differs from the baseline's has no relative test.
std::vector<ConditionComparison> compare_models(
    std::span<const ConditionDump> a, std::span<const ConditionDump> b,
    int num_classes, const BootstrapOptions& options = {});

nlohmann::json to_json(const ConditionComparison& c);

}  // namespace voxlect
