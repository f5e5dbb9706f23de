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

// Classification metrics over a confusion matrix whose rows are true classes
// and columns predicted classes, both in canonical class order.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace voxlect {

struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::int64_t> counts;  // row-major K x K

  std::int64_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * num_classes + predicted];
  }
  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t row_total(int truth) const;
  std::int64_t column_total(int predicted) const;
};

/// Throws on length mismatch or a class outside [0, K).
ConfusionMatrix confusion(std::span<const int> labels,
                          std::span<const int> predictions, int num_classes);

/// trace / total. Throws on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

/// Precision, recall or F1 with a zero denominator are reported as 0.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

/// Unweighted mean of per-class F1 over all K classes. Classes without test
/// support count as F1 = 0; a message naming each is appended to `warnings`.
double macro_f1(const ConfusionMatrix& cm,
                std::vector<std::string>* warnings = nullptr);

struct ConfusionPair {
  int true_class = 0;
  int predicted_class = 0;
  std::int64_t count = 0;
  double rate = 0.0;  // count / row_total(true_class)
};

/// Nonzero off-diagonal cells ranked by row-normalised rate, ties broken by
/// (true_class, predicted_class) in canonical order. At most n entries.
std::vector<ConfusionPair> top_confusion_pairs(const ConfusionMatrix& cm,
                                               int n);

/// One scored test utterance, as written to a prediction dump.
struct ScoredUtterance {
  std::string utterance_id;
  int label = -1;
  int predicted = -1;
  double max_probability = 0.0;
  double duration_s = 0.0;
  std::vector<double> probabilities;
};

/// JSON Lines, one ScoredUtterance per line.
void write_prediction_dump(const std::filesystem::path& path,
                           std::span<const ScoredUtterance> rows,
                           std::span<const std::string> class_names);
std::vector<ScoredUtterance> read_prediction_dump(
    const std::filesystem::path& path);

struct EvalReport {
  std::string group;
  std::vector<std::string> class_names;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  std::vector<ConfusionPair> top_confusion_pairs;
  std::int64_t n_utterances = 0;
  std::vector<std::string> warnings;
  nlohmann::json fingerprint = nlohmann::json::object();
};

inline constexpr int kDefaultTopPairs = 5;

/// Fills every metric from `rows`. Throws when `rows` is empty.
EvalReport make_report(std::span<const ScoredUtterance> rows,
                       std::vector<std::string> class_names,
                       std::string group, int top_pairs = kDefaultTopPairs);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// Header row of predicted class names, then one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm,
                          std::span<const std::string> class_names);

}  // namespace voxlect
