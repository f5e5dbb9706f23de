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

// Dialect-aware analysis of external ASR output and dialect scoring of
// synthesised speech.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "voxlect/model.hpp"
#include "voxlect/taxonomy.hpp"

namespace voxlect {

enum class Tokenization { whitespace, character };

std::string_view tokenization_name(Tokenization t);
Tokenization parse_tokenization(std::string_view s);

/// Character tokens for Chinese scripts, whitespace tokens elsewhere.
Tokenization default_tokenization(LanguageGroup group);

/// Character tokenization yields one token per non-space UTF-8 code point.
std::vector<std::string> tokenize(std::string_view text, Tokenization t);

/// Levenshtein distance with unit substitution, insertion and deletion costs.
std::size_t edit_distance(std::span<const std::string> ref,
                          std::span<const std::string> hyp);

/// Returned when the reference is empty but the hypothesis is not.
inline constexpr double kUndefinedWer = std::numeric_limits<double>::infinity();

/// Edit distance over reference token count. Both empty gives 0.
double wer(std::string_view reference, std::string_view hypothesis,
           Tokenization t = Tokenization::whitespace);

struct AsrRecord {
  std::string utterance_id;
  std::string reference;
  std::string hypothesis;
  std::optional<std::string> dialect;  // ground truth, canonical name
  std::filesystem::path audio_path;
};

/// JSON Lines with keys utterance_id, reference, hypothesis, audio_path and
/// optional dialect. Relative audio paths resolve against the file's
/// directory.
std::vector<AsrRecord> read_asr_records(const std::filesystem::path& path);

/// One ASR utterance after dialect prediction and scoring.
struct AsrScored {
  std::string utterance_id;
  std::optional<std::string> truth;
  std::string predicted;
  double max_probability = 0.0;
  std::size_t errors = 0;
  std::size_t ref_tokens = 0;
  double wer = 0.0;
};

struct WerCell {
  std::string dialect;
  int n_utterances = 0;
  int n_undefined = 0;          // empty reference, nonempty hypothesis
  double mean_wer = 0.0;        // utterance average over defined WERs
  double pooled_wer = 0.0;      // total errors / total reference tokens
  std::size_t errors = 0;
  std::size_t ref_tokens = 0;
};

struct StratifiedWer {
  Tokenization tokenization = Tokenization::whitespace;
  double gate = 0.7;
  std::vector<WerCell> by_ground_truth;  // utterances with a truth label
  std::vector<WerCell> by_prediction;    // utterances passing the gate
  int n_total = 0;
  int n_retained = 0;
  double retention_fraction = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultGate = 0.7;

/// Indices whose probability is strictly greater than `gate`.
std::vector<std::size_t> gate_indices(std::span<const double> max_probabilities,
                                      double gate);
double retention_fraction(std::span<const double> max_probabilities, double gate);

/// Groups scored utterances by ground truth and, after gating, by prediction.
/// Cells follow `class_order`; dialects outside it are appended by name.
StratifiedWer stratify_wer(std::span<const AsrScored> rows, double gate,
                           Tokenization tokenization,
                           const std::vector<std::string>& class_order);

/// Predicts a dialect for every record's audio, scores WER and stratifies.
StratifiedWer dialect_stratified_wer(std::span<const AsrRecord> records,
                                     const DialectClassifier& model,
                                     double gate = kDefaultGate,
                                     std::optional<Tokenization> tokenization = {});

nlohmann::json to_json(const StratifiedWer& s);

/// Mean probability assigned to `target` across predictions, in [0, 1].
double tts_dialect_score(std::span<const Prediction> predictions, int target);

struct TtsScore {
  std::string target;
  int n_utterances = 0;
  double mean_probability = 0.0;
  double percent() const { return 100.0 * mean_probability; }
};

/// Scores every audio file against `target`, a canonical class of the model.
TtsScore tts_dialect_score(std::span<const std::filesystem::path> audio,
                           const std::string& target,
                           const DialectClassifier& model);

}  // namespace voxlect
