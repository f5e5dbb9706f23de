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

#include "voxlect/apps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "voxlect/audio.hpp"
#include "voxlect/augment.hpp"
#include "voxlect/corpus.hpp"

namespace voxlect {

using nlohmann::json;

std::string_view tokenization_name(Tokenization t) {
  return t == Tokenization::character ? "character" : "whitespace";
}

Tokenization parse_tokenization(std::string_view s) {
  if (s == "character") return Tokenization::character;
  if (s == "whitespace") return Tokenization::whitespace;
  throw Error("unknown tokenization '" + std::string(s) + "'");
}

Tokenization default_tokenization(LanguageGroup group) {
  return group == LanguageGroup::mandarin_cantonese ? Tokenization::character
                                                    : Tokenization::whitespace;
}

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, Tokenization t) {
  std::vector<std::string> out;
  std::size_t i = 0;
  if (t == Tokenization::whitespace) {
    while (i < text.size()) {
      while (i < text.size() && is_space(text[i])) ++i;
      const std::size_t start = i;
      while (i < text.size() && !is_space(text[i])) ++i;
      if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
  }
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    const std::size_t n = std::min(utf8_length(c), text.size() - i);
    out.emplace_back(text.substr(i, n));
    i += n;
  }
  return out;
}

std::size_t edit_distance(std::span<const std::string> ref,
                          std::span<const std::string> hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

double wer(std::string_view reference, std::string_view hypothesis,
           Tokenization t) {
  const auto ref = tokenize(reference, t);
  const auto hyp = tokenize(hypothesis, t);
  if (ref.empty()) return hyp.empty() ? 0.0 : kUndefinedWer;
  return static_cast<double>(edit_distance(ref, hyp)) /
         static_cast<double>(ref.size());
}

std::vector<AsrRecord> read_asr_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ASR records " + path.string());
  const auto base = path.parent_path();
  std::vector<AsrRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      AsrRecord r;
      r.utterance_id = j.at("utterance_id").get<std::string>();
      r.reference = j.at("reference").get<std::string>();
      r.hypothesis = j.at("hypothesis").get<std::string>();
      if (j.contains("dialect") && !j.at("dialect").is_null()) {
        r.dialect = j.at("dialect").get<std::string>();
      }
      r.audio_path = resolve_path(base, j.at("audio_path").get<std::string>());
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " +
                  e.what());
    }
  }
  return out;
}

std::vector<std::size_t> gate_indices(std::span<const double> max_probabilities,
                                      double gate) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < max_probabilities.size(); ++i) {
    if (max_probabilities[i] > gate) out.push_back(i);
  }
  return out;
}

double retention_fraction(std::span<const double> max_probabilities,
                          double gate) {
  if (max_probabilities.empty()) return 0.0;
  return static_cast<double>(gate_indices(max_probabilities, gate).size()) /
         static_cast<double>(max_probabilities.size());
}

namespace {

std::vector<WerCell> group_cells(
    const std::vector<std::pair<std::string, const AsrScored*>>& members,
    const std::vector<std::string>& class_order) {
  std::map<std::string, std::vector<const AsrScored*>> by;
  for (const auto& [dialect, row] : members) by[dialect].push_back(row);
  std::vector<std::string> order;
  for (const auto& c : class_order) {
    if (by.count(c)) order.push_back(c);
  }
  for (const auto& [name, rows] : by) {
    if (std::find(class_order.begin(), class_order.end(), name) ==
        class_order.end()) {
      order.push_back(name);
    }
  }
  std::vector<WerCell> cells;
  for (const auto& name : order) {
    WerCell cell;
    cell.dialect = name;
    double sum = 0.0;
    int defined = 0;
    for (const AsrScored* r : by[name]) {
      ++cell.n_utterances;
      cell.errors += r->errors;
      cell.ref_tokens += r->ref_tokens;
      if (std::isfinite(r->wer)) {
        sum += r->wer;
        ++defined;
      } else {
        ++cell.n_undefined;
      }
    }
    cell.mean_wer = defined > 0 ? sum / defined : std::nan("");
    cell.pooled_wer =
        cell.ref_tokens > 0
            ? static_cast<double>(cell.errors) / static_cast<double>(cell.ref_tokens)
            : (cell.errors > 0 ? kUndefinedWer : 0.0);
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

StratifiedWer stratify_wer(std::span<const AsrScored> rows, double gate,
                           Tokenization tokenization,
                           const std::vector<std::string>& class_order) {
  StratifiedWer s;
  s.tokenization = tokenization;
  s.gate = gate;
  s.n_total = static_cast<int>(rows.size());

  std::vector<std::pair<std::string, const AsrScored*>> truth, predicted;
  std::vector<double> probs;
  for (const auto& r : rows) {
    if (r.truth) truth.emplace_back(*r.truth, &r);
    probs.push_back(r.max_probability);
  }
  for (std::size_t i : gate_indices(probs, gate)) {
    predicted.emplace_back(rows[i].predicted, &rows[i]);
  }
  s.n_retained = static_cast<int>(predicted.size());
  s.retention_fraction = retention_fraction(probs, gate);
  s.by_ground_truth = group_cells(truth, class_order);
  s.by_prediction = group_cells(predicted, class_order);
  if (s.n_retained == 0) {
    s.warnings.push_back("no utterance has a dialect probability above the gate");
  }
  for (const auto& r : rows) {
    if (!std::isfinite(r.wer)) {
      s.warnings.push_back("utterance " + r.utterance_id +
                           " has an empty reference and a nonempty hypothesis");
    }
  }
  return s;
}

StratifiedWer dialect_stratified_wer(std::span<const AsrRecord> records,
                                     const DialectClassifier& model,
                                     double gate,
                                     std::optional<Tokenization> tokenization) {
  const Tokenization tok = tokenization.value_or(default_tokenization(model.group()));
  EvaluationScope scope;
  std::vector<AsrScored> rows;
  rows.reserve(records.size());
  for (const auto& rec : records) {
    Waveform wave;
    try {
      wave = prepare_audio(read_wav(rec.audio_path));
    } catch (const Error& e) {
      throw Error("utterance " + rec.utterance_id + ": " + e.what());
    }
    const Prediction p = model.predict_proba(wave, rec.utterance_id);
    AsrScored s;
    s.utterance_id = rec.utterance_id;
    s.truth = rec.dialect;
    s.predicted = model.labels().at(p.argmax);
    s.max_probability = p.max_probability;
    const auto ref = tokenize(rec.reference, tok);
    const auto hyp = tokenize(rec.hypothesis, tok);
    s.errors = edit_distance(ref, hyp);
    s.ref_tokens = ref.size();
    s.wer = ref.empty() ? (hyp.empty() ? 0.0 : kUndefinedWer)
                        : static_cast<double>(s.errors) /
                              static_cast<double>(s.ref_tokens);
    rows.push_back(std::move(s));
  }
  return stratify_wer(rows, gate, tok, model.labels());
}

json to_json(const StratifiedWer& s) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto cells = [&](const std::vector<WerCell>& v) {
    json a = json::array();
    for (const auto& c : v) {
      a.push_back({{"dialect", c.dialect},
                   {"n_utterances", c.n_utterances},
                   {"n_undefined", c.n_undefined},
                   {"utterance_averaged_wer", num(c.mean_wer)},
                   {"pooled_wer", num(c.pooled_wer)},
                   {"errors", c.errors},
                   {"reference_tokens", c.ref_tokens}});
    }
    return a;
  };
  return {{"tokenization", tokenization_name(s.tokenization)},
          {"gate", s.gate},
          {"gate_rule", "max_probability > gate"},
          {"n_total", s.n_total},
          {"n_retained", s.n_retained},
          {"retention_fraction", s.retention_fraction},
          {"by_ground_truth", cells(s.by_ground_truth)},
          {"by_prediction", cells(s.by_prediction)},
          {"warnings", s.warnings}};
}

double tts_dialect_score(std::span<const Prediction> predictions, int target) {
  if (predictions.empty()) throw Error("tts score needs at least one utterance");
  double sum = 0.0;
  for (const auto& p : predictions) {
    if (target < 0 || target >= static_cast<int>(p.probabilities.size())) {
      throw Error("target class index out of range");
    }
    sum += p.probabilities[target];
  }
  return sum / static_cast<double>(predictions.size());
}

TtsScore tts_dialect_score(std::span<const std::filesystem::path> audio,
                           const std::string& target,
                           const DialectClassifier& model) {
  const auto& labels = model.labels();
  const auto it = std::find(labels.begin(), labels.end(), target);
  if (it == labels.end()) {
    throw Error("unknown target dialect '" + target + "' for group " +
                std::string(group_id(model.group())));
  }
  EvaluationScope scope;
  std::vector<Prediction> preds;
  for (const auto& path : audio) {
    preds.push_back(model.predict_proba(prepare_audio(read_wav(path)),
                                        path.filename().string()));
  }
  TtsScore s;
  s.target = target;
  s.n_utterances = static_cast<int>(preds.size());
  s.mean_probability =
      tts_dialect_score(preds, static_cast<int>(it - labels.begin()));
  return s;
}

}  // namespace voxlect
