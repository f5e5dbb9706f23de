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

#include "voxlect/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "voxlect/common.hpp"

namespace voxlect {

using nlohmann::json;

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (int i = 0; i < num_classes; ++i) s += at(i, i);
  return s;
}

std::int64_t ConfusionMatrix::row_total(int truth) const {
  std::int64_t s = 0;
  for (int j = 0; j < num_classes; ++j) s += at(truth, j);
  return s;
}

std::int64_t ConfusionMatrix::column_total(int predicted) const {
  std::int64_t s = 0;
  for (int i = 0; i < num_classes; ++i) s += at(i, predicted);
  return s;
}

ConfusionMatrix confusion(std::span<const int> labels,
                          std::span<const int> predictions, int num_classes) {
  if (num_classes < 1) throw Error("confusion: need at least one class");
  if (labels.size() != predictions.size()) {
    throw Error("confusion: " + std::to_string(labels.size()) + " labels but " +
                std::to_string(predictions.size()) + " predictions");
  }
  ConfusionMatrix cm;
  cm.num_classes = num_classes;
  cm.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const int i = labels[t], j = predictions[t];
    if (i < 0 || i >= num_classes || j < 0 || j >= num_classes) {
      throw Error("confusion: class index out of range at position " +
                  std::to_string(t));
    }
    ++cm.counts[static_cast<std::size_t>(i) * num_classes + j];
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw Error("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out(cm.num_classes);
  for (int k = 0; k < cm.num_classes; ++k) {
    const double tp = static_cast<double>(cm.at(k, k));
    const auto support = cm.row_total(k);
    const auto predicted = cm.column_total(k);
    ClassMetrics& m = out[k];
    m.support = support;
    m.precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    m.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
  }
  return out;
}

double macro_f1(const ConfusionMatrix& cm, std::vector<std::string>* warnings) {
  if (cm.total() == 0) throw Error("Macro-F1 of an empty confusion matrix");
  const auto per_class = per_class_metrics(cm);
  double sum = 0.0;
  for (int k = 0; k < cm.num_classes; ++k) {
    sum += per_class[k].f1;
    if (per_class[k].support == 0 && warnings) {
      warnings->push_back("class " + std::to_string(k) +
                          " has no test support; scored as F1 = 0");
    }
  }
  return sum / cm.num_classes;
}

std::vector<ConfusionPair> top_confusion_pairs(const ConfusionMatrix& cm,
                                               int n) {
  std::vector<ConfusionPair> pairs;
  for (int i = 0; i < cm.num_classes; ++i) {
    const auto row = cm.row_total(i);
    for (int j = 0; j < cm.num_classes; ++j) {
      if (i == j || cm.at(i, j) == 0) continue;
      pairs.push_back({i, j, cm.at(i, j),
                       static_cast<double>(cm.at(i, j)) /
                           static_cast<double>(row)});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const ConfusionPair& a, const ConfusionPair& b) {
                     return a.rate > b.rate;
                   });
  if (n >= 0 && pairs.size() > static_cast<std::size_t>(n)) pairs.resize(n);
  return pairs;
}

void write_prediction_dump(const std::filesystem::path& path,
                           std::span<const ScoredUtterance> rows,
                           std::span<const std::string> class_names) {
  std::ostringstream os;
  for (const auto& r : rows) {
    json j = {{"utterance_id", r.utterance_id},
              {"label", r.label},
              {"predicted", r.predicted},
              {"max_probability", r.max_probability},
              {"duration_s", r.duration_s},
              {"probabilities", r.probabilities}};
    auto name = [&](int k) {
      return k >= 0 && k < static_cast<int>(class_names.size())
                 ? json(class_names[k])
                 : json(nullptr);
    };
    j["label_name"] = name(r.label);
    j["predicted_name"] = name(r.predicted);
    os << j.dump() << '\n';
  }
  write_file_atomic(path, os.str());
}

std::vector<ScoredUtterance> read_prediction_dump(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open prediction dump " + path.string());
  std::vector<ScoredUtterance> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ScoredUtterance r;
      r.utterance_id = j.at("utterance_id").get<std::string>();
      r.label = j.at("label").get<int>();
      r.predicted = j.at("predicted").get<int>();
      r.max_probability = j.at("max_probability").get<double>();
      r.duration_s = j.value("duration_s", 0.0);
      r.probabilities = j.value("probabilities", std::vector<double>{});
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " +
                  e.what());
    }
  }
  return rows;
}

EvalReport make_report(std::span<const ScoredUtterance> rows,
                       std::vector<std::string> class_names, std::string group,
                       int top_pairs) {
  if (rows.empty()) throw Error("cannot build a report from zero utterances");
  const int k = static_cast<int>(class_names.size());
  std::vector<int> labels, preds;
  labels.reserve(rows.size());
  preds.reserve(rows.size());
  for (const auto& r : rows) {
    labels.push_back(r.label);
    preds.push_back(r.predicted);
  }
  EvalReport rep;
  rep.group = std::move(group);
  rep.confusion = confusion(labels, preds, k);
  rep.accuracy = accuracy(rep.confusion);
  rep.macro_f1 = macro_f1(rep.confusion);
  rep.per_class = per_class_metrics(rep.confusion);
  for (int c = 0; c < k; ++c) {
    if (rep.per_class[c].support == 0) {
      rep.warnings.push_back("class '" + class_names[c] +
                             "' has no test support; scored as F1 = 0");
    }
  }
  rep.top_confusion_pairs = top_confusion_pairs(rep.confusion, top_pairs);
  rep.n_utterances = static_cast<std::int64_t>(rows.size());
  rep.class_names = std::move(class_names);
  return rep;
}

json to_json(const EvalReport& r) {
  json per_class = json::array();
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& m = r.per_class[k];
    per_class.push_back({{"class", r.class_names.at(k)},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  json rows = json::array();
  for (int i = 0; i < r.confusion.num_classes; ++i) {
    std::vector<std::int64_t> row;
    for (int j = 0; j < r.confusion.num_classes; ++j) {
      row.push_back(r.confusion.at(i, j));
    }
    rows.push_back(row);
  }
  json pairs = json::array();
  for (const auto& p : r.top_confusion_pairs) {
    pairs.push_back({{"true", r.class_names.at(p.true_class)},
                     {"predicted", r.class_names.at(p.predicted_class)},
                     {"true_index", p.true_class},
                     {"predicted_index", p.predicted_class},
                     {"count", p.count},
                     {"rate", p.rate}});
  }
  return {{"group", r.group},
          {"classes", r.class_names},
          {"accuracy", r.accuracy},
          {"macro_f1", r.macro_f1},
          {"n_utterances", r.n_utterances},
          {"per_class", per_class},
          {"confusion", rows},
          {"top_confusion_pairs", pairs},
          {"warnings", r.warnings},
          {"fingerprint", r.fingerprint}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  try {
    r.group = j.at("group").get<std::string>();
    r.class_names = j.at("classes").get<std::vector<std::string>>();
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.n_utterances = j.at("n_utterances").get<std::int64_t>();
    for (const auto& m : j.at("per_class")) {
      r.per_class.push_back({m.at("precision").get<double>(),
                             m.at("recall").get<double>(),
                             m.at("f1").get<double>(),
                             m.at("support").get<std::int64_t>()});
    }
    const auto& rows = j.at("confusion");
    r.confusion.num_classes = static_cast<int>(rows.size());
    for (const auto& row : rows) {
      if (row.size() != rows.size()) throw Error("confusion matrix is not square");
      for (const auto& v : row) r.confusion.counts.push_back(v.get<std::int64_t>());
    }
    for (const auto& p : j.at("top_confusion_pairs")) {
      r.top_confusion_pairs.push_back(
          {p.at("true_index").get<int>(), p.at("predicted_index").get<int>(),
           p.at("count").get<std::int64_t>(), p.at("rate").get<double>()});
    }
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.fingerprint = j.value("fingerprint", json::object());
  } catch (const json::exception& e) {
    throw Error(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string confusion_csv(const ConfusionMatrix& cm,
                          std::span<const std::string> class_names) {
  if (static_cast<int>(class_names.size()) != cm.num_classes) {
    throw Error("confusion_csv: class name count does not match the matrix");
  }
  std::ostringstream os;
  os << "true\\predicted";
  for (const auto& n : class_names) os << ',' << csv_field(n);
  os << '\n';
  for (int i = 0; i < cm.num_classes; ++i) {
    os << csv_field(class_names[i]);
    for (int j = 0; j < cm.num_classes; ++j) os << ',' << cm.at(i, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace voxlect
