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

#include "voxlect/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace voxlect {

using nlohmann::json;

std::string condition_name(std::optional<double> snr_db) {
  if (!snr_db) return "clean";
  std::ostringstream os;
  os << "snr" << *snr_db;
  return os.str();
}

std::vector<NoiseLevelResult> noise_sweep(const DialectClassifier& model,
                                          std::span<const ManifestRecord> records,
                                          const Taxonomy& taxonomy,
                                          std::span<const double> snr_levels_db,
                                          const EvalOptions& options) {
  for (double s : snr_levels_db) {
    if (!std::isfinite(s)) throw Error("SNR levels must be finite");
  }
  std::vector<NoiseLevelResult> out;
  std::vector<std::optional<double>> conditions{std::nullopt};
  conditions.insert(conditions.end(), snr_levels_db.begin(), snr_levels_db.end());
  for (const auto& snr : conditions) {
    EvalOptions eo = options;
    eo.snr_db = snr;
    NoiseLevelResult r;
    r.condition = condition_name(snr);
    r.snr_db = snr;
    r.eval = evaluate(model, records, taxonomy, eo);
    const double clean = out.empty() ? r.eval.report.macro_f1
                                     : out.front().eval.report.macro_f1;
    r.delta_macro_f1 = r.eval.report.macro_f1 - clean;
    r.relative_change = clean > 0.0 ? r.delta_macro_f1 / clean : std::nan("");
    out.push_back(std::move(r));
  }
  return out;
}

LengthStrata length_stratified_eval(std::span<const ScoredUtterance> rows,
                                    const std::vector<std::string>& class_names,
                                    const std::string& group,
                                    double threshold_s) {
  LengthStrata s;
  s.threshold_s = threshold_s;
  for (const auto& r : rows) {
    (r.duration_s <= threshold_s ? s.short_rows : s.long_rows).push_back(r);
  }
  if (!s.short_rows.empty()) {
    s.short_report = make_report(s.short_rows, class_names, group);
  }
  if (!s.long_rows.empty()) {
    s.long_report = make_report(s.long_rows, class_names, group);
  }
  return s;
}

LengthStrata length_stratified_eval(const DialectClassifier& model,
                                    std::span<const ManifestRecord> records,
                                    const Taxonomy& taxonomy,
                                    double threshold_s,
                                    const EvalOptions& options) {
  const EvalResult ev = evaluate(model, records, taxonomy, options);
  return length_stratified_eval(ev.predictions, model.labels(),
                                std::string(group_id(model.group())),
                                threshold_s);
}

namespace {

// Paired label/prediction arrays for one condition, aligned across models.
struct Aligned {
  std::string condition;
  std::vector<std::string> ids;
  std::vector<int> labels, pred_a, pred_b;
};

Aligned align(const ConditionDump& a, const ConditionDump& b) {
  if (a.rows.size() != b.rows.size()) {
    throw Error("condition " + a.condition +
                ": models were scored on different utterance sets");
  }
  std::unordered_map<std::string, const ScoredUtterance*> by_id;
  for (const auto& r : b.rows) by_id[r.utterance_id] = &r;
  Aligned out;
  out.condition = a.condition;
  for (const auto& r : a.rows) {
    auto it = by_id.find(r.utterance_id);
    if (it == by_id.end()) {
      throw Error("condition " + a.condition + ": utterance " + r.utterance_id +
                  " missing from the second model");
    }
    if (it->second->label != r.label) {
      throw Error("utterance " + r.utterance_id + " has different labels");
    }
    out.ids.push_back(r.utterance_id);
    out.labels.push_back(r.label);
    out.pred_a.push_back(r.predicted);
    out.pred_b.push_back(it->second->predicted);
  }
  return out;
}

// Reorders `c` to follow `order`; false when the id sets differ.
bool reorder_like(Aligned& c, const std::vector<std::string>& order) {
  if (c.ids.size() != order.size()) return false;
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < c.ids.size(); ++i) pos[c.ids[i]] = i;
  Aligned r;
  r.condition = c.condition;
  for (const auto& id : order) {
    auto it = pos.find(id);
    if (it == pos.end()) return false;
    r.ids.push_back(id);
    r.labels.push_back(c.labels[it->second]);
    r.pred_a.push_back(c.pred_a[it->second]);
    r.pred_b.push_back(c.pred_b[it->second]);
  }
  c = std::move(r);
  return true;
}

class MacroF1 {
 public:
  explicit MacroF1(int k) : k_(k), counts_(static_cast<std::size_t>(k) * k) {}

  double operator()(const std::vector<int>& labels, const std::vector<int>& preds,
                    const std::vector<std::size_t>* idx) {
    std::fill(counts_.begin(), counts_.end(), 0);
    const std::size_t n = idx ? idx->size() : labels.size();
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t u = idx ? (*idx)[t] : t;
      ++counts_[static_cast<std::size_t>(labels[u]) * k_ + preds[u]];
    }
    double sum = 0.0;
    for (int c = 0; c < k_; ++c) {
      std::int64_t tp = counts_[static_cast<std::size_t>(c) * k_ + c], row = 0,
                   col = 0;
      for (int j = 0; j < k_; ++j) {
        row += counts_[static_cast<std::size_t>(c) * k_ + j];
        col += counts_[static_cast<std::size_t>(j) * k_ + c];
      }
      if (tp > 0) sum += 2.0 * tp / static_cast<double>(row + col);
    }
    return sum / k_;
  }

 private:
  int k_;
  std::vector<std::int64_t> counts_;
};

double relative(double value, double base) {
  return base > 0.0 ? (value - base) / base : std::nan("");
}

double two_sided_p(const std::vector<double>& deltas) {
  std::size_t le = 0, ge = 0;
  for (double d : deltas) {
    if (d <= 0.0) ++le;
    if (d >= 0.0) ++ge;
  }
  const double r = static_cast<double>(deltas.size());
  return std::min(1.0, 2.0 * (static_cast<double>(std::min(le, ge)) + 1.0) /
                           (r + 1.0));
}

void check_classes(const Aligned& c, int k) {
  auto bad = [k](int v) { return v < 0 || v >= k; };
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    if (bad(c.labels[i]) || bad(c.pred_a[i]) || bad(c.pred_b[i])) {
      throw Error("utterance " + c.ids[i] + " has a class index out of range");
    }
  }
}

}  // namespace

std::vector<ConditionComparison> compare_models(
    std::span<const ConditionDump> a, std::span<const ConditionDump> b,
    int num_classes, const BootstrapOptions& options) {
  if (a.empty()) throw Error("compare_models: no conditions");
  if (a.size() != b.size()) {
    throw Error("compare_models: models cover different condition counts");
  }
  if (options.resamples < 1) throw Error("compare_models: resamples must be >= 1");
  std::vector<Aligned> conds;
  for (const auto& da : a) {
    auto it = std::find_if(b.begin(), b.end(), [&](const ConditionDump& d) {
      return d.condition == da.condition;
    });
    if (it == b.end()) {
      throw Error("condition " + da.condition + " missing for the second model");
    }
    if (da.rows.empty()) throw Error("condition " + da.condition + " is empty");
    conds.push_back(align(da, *it));
    check_classes(conds.back(), num_classes);
  }
  std::size_t base = 0;
  for (std::size_t c = 0; c < conds.size(); ++c) {
    if (conds[c].condition == "clean") {
      base = c;
      break;
    }
  }
  const std::vector<std::string> base_order = conds[base].ids;
  std::vector<bool> paired_with_base(conds.size());
  for (std::size_t c = 0; c < conds.size(); ++c) {
    paired_with_base[c] = reorder_like(conds[c], base_order);
  }

  MacroF1 f1(num_classes);
  const std::size_t nc = conds.size();
  std::vector<double> fa(nc), fb(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    fa[c] = f1(conds[c].labels, conds[c].pred_a, nullptr);
    fb[c] = f1(conds[c].labels, conds[c].pred_b, nullptr);
  }

  const auto resamples = static_cast<std::size_t>(options.resamples);
  std::vector<std::vector<double>> deltas(nc), rel_deltas(nc);
  for (auto& d : deltas) d.reserve(resamples);
  for (auto& d : rel_deltas) d.reserve(resamples);
  Rng rng = seeded_rng(options.seed, "bootstrap");
  Rng own_rng = seeded_rng(options.seed, "bootstrap-unpaired");
  std::vector<std::size_t> idx(base_order.size()), own;
  std::vector<double> ra(nc), rb(nc);
  for (std::size_t r = 0; r < resamples; ++r) {
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
    for (auto& i : idx) i = pick(rng);
    for (std::size_t c = 0; c < nc; ++c) {
      const std::vector<std::size_t>* use = &idx;
      if (!paired_with_base[c]) {
        own.resize(conds[c].ids.size());
        std::uniform_int_distribution<std::size_t> p2(0, own.size() - 1);
        for (auto& i : own) i = p2(own_rng);
        use = &own;
      }
      ra[c] = f1(conds[c].labels, conds[c].pred_a, use);
      rb[c] = f1(conds[c].labels, conds[c].pred_b, use);
      deltas[c].push_back(ra[c] - rb[c]);
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (!paired_with_base[c]) continue;
      const double d = relative(ra[c], ra[base]) - relative(rb[c], rb[base]);
      if (std::isfinite(d)) rel_deltas[c].push_back(d);
    }
  }

  std::vector<ConditionComparison> out;
  for (std::size_t c = 0; c < nc; ++c) {
    ConditionComparison cc;
    cc.condition = conds[c].condition;
    cc.macro_f1_a = fa[c];
    cc.macro_f1_b = fb[c];
    cc.score_delta = fa[c] - fb[c];
    cc.p_value = two_sided_p(deltas[c]);
    cc.significant = cc.p_value < options.alpha;
    cc.relative_change_a = relative(fa[c], fa[base]);
    cc.relative_change_b = relative(fb[c], fb[base]);
    cc.relative_delta = cc.relative_change_a - cc.relative_change_b;
    if (c != base && paired_with_base[c] && !rel_deltas[c].empty()) {
      cc.relative_p_value = two_sided_p(rel_deltas[c]);
      cc.relative_significant = cc.relative_p_value < options.alpha;
    }
    out.push_back(cc);
  }
  return out;
}

json to_json(const ConditionComparison& c) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"condition", c.condition},
          {"macro_f1_a", c.macro_f1_a},
          {"macro_f1_b", c.macro_f1_b},
          {"score_delta", c.score_delta},
          {"p_value", c.p_value},
          {"significant", c.significant},
          {"relative_change_a", num(c.relative_change_a)},
          {"relative_change_b", num(c.relative_change_b)},
          {"relative_delta", num(c.relative_delta)},
          {"relative_p_value", c.relative_p_value},
          {"relative_significant", c.relative_significant}};
}

}  // namespace voxlect
