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

#include "voxlect/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace voxlect {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* what) {
  throw Error("config key '" + key + "': expected " + what + ", got '" + value +
              "'");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) {
    bad_value(key, v, "a number");
  }
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : to_list(v)) out.push_back(to_int<int>(key, s));
  return out;
}

bool is_mms_lid_256(const std::string& backbone_id) {
  std::string id = backbone_id;
  std::transform(id.begin(), id.end(), id.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return id.find("mms-lid-256") != std::string::npos;
}

json policy_json(const AugmentationPolicy& p) {
  return {{"noise_prob", p.noise_prob},
          {"snr_low_db", p.snr_low_db},
          {"snr_high_db", p.snr_high_db},
          {"mask_prob", p.mask_prob},
          {"mask_ratio_low", p.mask_ratio_low},
          {"mask_ratio_high", p.mask_ratio_high},
          {"mask_spans", p.mask_spans},
          {"stretch_prob", p.stretch_prob},
          {"stretch_low", p.stretch_low},
          {"stretch_high", p.stretch_high},
          {"polarity_prob", p.polarity_prob},
          {"max_duration_s", p.max_duration_s}};
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

int RunConfig::resolved_epochs() const {
  if (epochs) return *epochs;
  const LanguageGroup g = language_group();
  return g == LanguageGroup::thai || g == LanguageGroup::arabic ? 5 : 15;
}

int RunConfig::resolved_batch_size() const {
  if (batch_size) return *batch_size;
  return is_mms_lid_256(backbone_id) ? 6 : 16;
}

LoraOptions RunConfig::lora_options() const {
  LoraOptions o;
  o.rank = lora_rank;
  o.alpha = lora_alpha.value_or(static_cast<double>(lora_rank));
  o.targets = lora_targets;
  o.seed = seed;
  return o;
}

ProbeConfig RunConfig::probe_config() const {
  ProbeConfig p;
  p.conv_channels = conv_channels;
  p.head_hidden = head_hidden;
  p.unconstrained_layer_weights = unconstrained_layer_weights;
  p.seed = seed;
  return p;
}

PrepareOptions RunConfig::prepare_options() const {
  PrepareOptions o;
  o.truncate = truncate;
  o.max_duration_s = max_duration_s;
  return o;
}

void RunConfig::validate() const {
  if (group.empty()) throw Error("config: 'group' is required");
  (void)language_group();
  if (!(learning_rate > 0.0)) throw Error("config: learning_rate must be > 0");
  if (epochs && *epochs < 1) throw Error("config: epochs must be >= 1");
  if (batch_size && *batch_size < 1) throw Error("config: batch_size must be >= 1");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw Error("config: validation_fraction must lie in [0, 1)");
  }
  if (test_fraction <= 0.0 || test_fraction >= 1.0) {
    throw Error("config: test_fraction must lie in (0, 1)");
  }
  if (lora_rank < 1) throw Error("config: lora.rank must be >= 1");
  if (lora_alpha && !(*lora_alpha > 0.0)) {
    throw Error("config: lora.alpha must be > 0");
  }
  if (!(max_duration_s > 0.0)) throw Error("config: max_duration_s must be > 0");
  if (optimizer.beta1 < 0.0 || optimizer.beta1 >= 1.0 ||
      optimizer.beta2 < 0.0 || optimizer.beta2 >= 1.0) {
    throw Error("config: optimizer betas must lie in [0, 1)");
  }
  if (!(optimizer.eps > 0.0) || optimizer.weight_decay < 0.0 ||
      optimizer.grad_clip < 0.0) {
    throw Error("config: invalid optimizer settings");
  }
  augmentation.validate();
}

json RunConfig::to_json() const {
  return {{"group", group},
          {"backbone", backbone_id},
          {"manifest", manifest.string()},
          {"output_dir", output_dir.string()},
          {"seed", seed},
          {"learning_rate", learning_rate},
          {"epochs", resolved_epochs()},
          {"batch_size", resolved_batch_size()},
          {"validation_fraction", validation_fraction},
          {"test_fraction", test_fraction},
          {"augment", augment},
          {"augmentation", policy_json(augmentation)},
          {"lora",
           {{"rank", lora_rank},
            {"alpha", lora_options().alpha},
            {"targets", lora_targets}}},
          {"probe",
           {{"conv_channels", conv_channels},
            {"head_hidden", head_hidden},
            {"unconstrained_layer_weights", unconstrained_layer_weights}}},
          {"optimizer",
           {{"name", "adamw"},
            {"beta1", optimizer.beta1},
            {"beta2", optimizer.beta2},
            {"eps", optimizer.eps},
            {"weight_decay", optimizer.weight_decay},
            {"grad_clip", optimizer.grad_clip},
            {"schedule", "constant"}}},
          {"max_duration_s", max_duration_s},
          {"truncate", truncate}};
}

void set_config_value(RunConfig& c, const std::string& key,
                      const std::string& value) {
  const std::string& k = key;
  const std::string& v = value;
  AugmentationPolicy& a = c.augmentation;
  if (k == "group") {
    (void)parse_group(v);
    c.group = v;
  } else if (k == "backbone") {
    c.backbone_id = v;
  } else if (k == "manifest") {
    c.manifest = v;
  } else if (k == "output_dir") {
    c.output_dir = v;
  } else if (k == "seed") {
    c.seed = to_int<std::uint64_t>(k, v);
  } else if (k == "learning_rate") {
    c.learning_rate = to_double(k, v);
  } else if (k == "epochs") {
    c.epochs = to_int<int>(k, v);
  } else if (k == "batch_size") {
    c.batch_size = to_int<int>(k, v);
  } else if (k == "validation_fraction") {
    c.validation_fraction = to_double(k, v);
  } else if (k == "test_fraction") {
    c.test_fraction = to_double(k, v);
  } else if (k == "augment") {
    c.augment = to_bool(k, v);
  } else if (k == "aug.noise_prob") {
    a.noise_prob = to_double(k, v);
  } else if (k == "aug.snr_low_db") {
    a.snr_low_db = to_double(k, v);
  } else if (k == "aug.snr_high_db") {
    a.snr_high_db = to_double(k, v);
  } else if (k == "aug.mask_prob") {
    a.mask_prob = to_double(k, v);
  } else if (k == "aug.mask_ratio_low") {
    a.mask_ratio_low = to_double(k, v);
  } else if (k == "aug.mask_ratio_high") {
    a.mask_ratio_high = to_double(k, v);
  } else if (k == "aug.mask_spans") {
    a.mask_spans = to_int<int>(k, v);
  } else if (k == "aug.stretch_prob") {
    a.stretch_prob = to_double(k, v);
  } else if (k == "aug.stretch_low") {
    a.stretch_low = to_double(k, v);
  } else if (k == "aug.stretch_high") {
    a.stretch_high = to_double(k, v);
  } else if (k == "aug.polarity_prob") {
    a.polarity_prob = to_double(k, v);
  } else if (k == "lora.rank") {
    c.lora_rank = to_int<int>(k, v);
  } else if (k == "lora.alpha") {
    c.lora_alpha = to_double(k, v);
  } else if (k == "lora.targets") {
    c.lora_targets = to_list(v);
  } else if (k == "probe.conv_channels") {
    c.conv_channels = to_int_list(k, v);
  } else if (k == "probe.head_hidden") {
    c.head_hidden = to_int_list(k, v);
  } else if (k == "probe.unconstrained_layer_weights") {
    c.unconstrained_layer_weights = to_bool(k, v);
  } else if (k == "optim.beta1") {
    c.optimizer.beta1 = to_double(k, v);
  } else if (k == "optim.beta2") {
    c.optimizer.beta2 = to_double(k, v);
  } else if (k == "optim.eps") {
    c.optimizer.eps = to_double(k, v);
  } else if (k == "optim.weight_decay") {
    c.optimizer.weight_decay = to_double(k, v);
  } else if (k == "optim.grad_clip") {
    c.optimizer.grad_clip = to_double(k, v);
  } else if (k == "max_duration_s") {
    c.max_duration_s = to_double(k, v);
    a.max_duration_s = c.max_duration_s;
  } else if (k == "truncate") {
    c.truncate = to_bool(k, v);
  } else {
    throw Error("unknown config key '" + k + "'");
  }
}

RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) +
                  ": expected 'key = value'");
    }
    set_config_value(cfg, trim(std::string_view(line).substr(0, eq)),
                     trim(std::string_view(line).substr(eq + 1)));
  }
  if (!cfg.manifest.empty()) cfg.manifest = resolve_path(base_dir, cfg.manifest);
  if (!cfg.output_dir.empty()) {
    cfg.output_dir = resolve_path(base_dir, cfg.output_dir);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error("config not found: " + path.string());
  }
  return parse_run_config(read_file(path), path.parent_path());
}

AdamW::AdamW(double learning_rate, const OptimizerConfig& config)
    : lr_(learning_rate), cfg_(config) {}

void AdamW::step(std::span<const NamedParameter> params,
                 std::span<const Matrix> grads) {
  if (params.size() != grads.size()) {
    throw Error("optimizer: gradient count does not match parameter count");
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  double clip = 1.0;
  if (cfg_.grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto& g : grads) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) clip = cfg_.grad_clip / norm;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i].value;
    const Matrix g = grads[i] * clip;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseAbs2();
    if (cfg_.weight_decay > 0.0) p *= 1.0 - lr_ * cfg_.weight_decay;
    p.array() -= lr_ * (m_[i].array() / bc1) /
                 ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

IngestResult prepare_corpus(const RunConfig& cfg, const Taxonomy& taxonomy) {
  if (cfg.manifest.empty()) throw Error("config: 'manifest' is required");
  IngestResult res = ingest(cfg.manifest, taxonomy, cfg.language_group());
  const auto& policy = default_subsample_policy();
  std::vector<ManifestRecord> kept;
  std::map<std::string, std::vector<ManifestRecord>> capped;
  for (auto& r : res.records) {
    if (policy.count(r.dataset_id)) {
      capped[r.dataset_id].push_back(std::move(r));
    } else {
      kept.push_back(std::move(r));
    }
  }
  for (auto& [dataset, recs] : capped) {
    auto sub = subsample_per_speaker(std::move(recs), policy.find(dataset)->second,
                                     cfg.seed);
    kept.insert(kept.end(), sub.begin(), sub.end());
  }
  res.records = assign_splits(std::move(kept), cfg.test_fraction, cfg.seed);
  return res;
}

std::vector<ManifestRecord> select_split(std::span<const ManifestRecord> records,
                                         Split split) {
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

namespace {

// Moves validation_fraction of the training speakers out of `train`,
// drawing them per class (a speaker's class is that of its first record) so
// that every class with two or more speakers is represented.
std::vector<ManifestRecord> carve_validation(std::vector<ManifestRecord>& train,
                                             double fraction,
                                             std::uint64_t seed) {
  if (fraction <= 0.0) return {};
  std::map<std::string, std::string> speaker_class;
  for (const auto& r : train) speaker_class.emplace(r.speaker_key(), *r.label);
  if (speaker_class.size() < 2) {
    throw Error("cannot hold out validation speakers: training split has " +
                std::to_string(speaker_class.size()) + " speaker(s)");
  }
  std::map<std::string, std::vector<std::string>> by_class;
  for (const auto& [spk, cls] : speaker_class) by_class[cls].push_back(spk);
  Rng rng = seeded_rng(seed, "validation-speakers");
  std::unordered_set<std::string> held;
  for (auto& [cls, speakers] : by_class) {
    const auto n = static_cast<long long>(speakers.size());
    if (n < 2) continue;
    const long long n_val = std::clamp(
        std::llround(fraction * static_cast<double>(n)), 1LL, n - 1);
    std::shuffle(speakers.begin(), speakers.end(), rng);
    held.insert(speakers.begin(), speakers.begin() + n_val);
  }
  if (held.empty()) {
    std::vector<std::string> all;
    for (const auto& [spk, cls] : speaker_class) all.push_back(spk);
    held.insert(all[std::uniform_int_distribution<std::size_t>(
        0, all.size() - 1)(rng)]);
  }
  std::vector<ManifestRecord> val, rest;
  for (auto& r : train) {
    (held.count(r.speaker_key()) ? val : rest).push_back(std::move(r));
  }
  train = std::move(rest);
  return val;
}

void check_finite(double loss, int epoch, const std::string& id) {
  if (!std::isfinite(loss)) {
    throw Error("non-finite loss at epoch " + std::to_string(epoch) +
                " on utterance " + id + "; aborting");
  }
}

}  // namespace

TrainResult train(const RunConfig& cfg, std::span<const ManifestRecord> corpus,
                  const Taxonomy& taxonomy) {
  cfg.validate();
  if (cfg.output_dir.empty()) throw Error("config: 'output_dir' is required");
  const LanguageGroup group = cfg.language_group();

  std::vector<ManifestRecord> train_set = select_split(corpus, Split::train);
  if (train_set.empty()) throw Error("training corpus is empty");
  std::unordered_set<std::string> test_ids;
  for (const auto& r : corpus) {
    if (r.split == Split::test) test_ids.insert(r.utterance_id);
  }
  for (const auto& r : train_set) {
    if (test_ids.count(r.utterance_id)) {
      throw Error("utterance " + r.utterance_id + " is in both train and test");
    }
    if (!r.label) throw Error("record " + r.utterance_id + " has no label");
    (void)taxonomy.label(group, *r.label);
  }

  std::vector<ManifestRecord> val_set =
      carve_validation(train_set, cfg.validation_fraction, cfg.seed);

  DialectClassifier model(taxonomy, group, make_backbone(cfg.backbone_id),
                          cfg.lora_options(), cfg.probe_config());
  if (model.probe().config().num_classes != taxonomy.num_classes(group)) {
    throw Error("class count mismatch between probe and taxonomy");
  }
  const std::string base_hash = model.backbone().base_weights_hash();
  const PrepareOptions prep = cfg.prepare_options();
  const int epochs = cfg.resolved_epochs();
  const int batch = cfg.resolved_batch_size();

  auto params = model.trainable_parameters();
  AdamW opt(cfg.learning_rate, cfg.optimizer);

  std::filesystem::create_directories(cfg.output_dir);
  TrainResult result;
  result.log_path = cfg.output_dir / "train_log.jsonl";
  result.best_checkpoint = cfg.output_dir / "best";
  result.last_checkpoint = cfg.output_dir / "last";
  result.n_train = static_cast<int>(train_set.size());
  result.n_validation = static_cast<int>(val_set.size());
  result.best_val_macro_f1 = -1.0;
  std::string log_text;

  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = seeded_rng(cfg.seed, "shuffle/" + std::to_string(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    int steps = 0;
    std::vector<Matrix> grads, acc;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double inv = 1.0 / static_cast<double>(end - start);
      acc.clear();
      for (std::size_t i = start; i < end; ++i) {
        const ManifestRecord& rec = train_set[order[i]];
        PreparedExample ex = prepare(rec, taxonomy, group, prep);
        if (cfg.augment) {
          Rng aug_rng = seeded_rng(
              cfg.seed ^ cfg.augmentation.seed,
              "augment/" + std::to_string(epoch) + "/" + rec.utterance_id);
          ex.waveform = apply_policy(ex.waveform, cfg.augmentation, aug_rng);
        }
        const double loss = model.loss_and_gradients(ex.waveform, ex.label, grads);
        check_finite(loss, epoch, rec.utterance_id);
        loss_sum += loss;
        if (acc.empty()) {
          for (auto& g : grads) acc.push_back(g * inv);
        } else {
          for (std::size_t p = 0; p < grads.size(); ++p) acc[p] += grads[p] * inv;
        }
      }
      opt.step(params, acc);
      ++steps;
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(train_set.size());
    log.steps = steps;
    log.val_macro_f1 = std::numeric_limits<double>::quiet_NaN();
    log.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (!val_set.empty()) {
      EvalOptions eo;
      eo.prepare = prep;
      eo.batch_size = batch;
      const EvalResult ev = evaluate(model, val_set, taxonomy, eo);
      log.val_macro_f1 = ev.report.macro_f1;
      log.val_accuracy = ev.report.accuracy;
    }
    const double score = val_set.empty() ? static_cast<double>(epoch)
                                         : log.val_macro_f1;
    if (score > result.best_val_macro_f1 || epoch == 1) {
      log.best = true;
      result.best_epoch = epoch;
      result.best_val_macro_f1 = score;
    }

    const json extra = {{"epoch", epoch},
                        {"val_macro_f1", nullable(log.val_macro_f1)},
                        {"run_config", cfg.to_json()}};
    model.save(result.last_checkpoint, extra);
    if (log.best) model.save(result.best_checkpoint, extra);

    const json line = {{"epoch", log.epoch},
                       {"train_loss", log.train_loss},
                       {"val_macro_f1", nullable(log.val_macro_f1)},
                       {"val_accuracy", nullable(log.val_accuracy)},
                       {"steps", log.steps},
                       {"optimizer_steps", opt.steps()},
                       {"best", log.best}};
    log_text += line.dump() + "\n";
    write_file_atomic(result.log_path, log_text);
    result.epochs.push_back(log);
  }
  if (val_set.empty()) result.best_val_macro_f1 = std::nan("");

  if (model.backbone().base_weights_hash() != base_hash) {
    throw Error("frozen backbone weights changed during training");
  }
  return result;
}

EvalResult evaluate(const DialectClassifier& model,
                    std::span<const ManifestRecord> records,
                    const Taxonomy& taxonomy, const EvalOptions& options) {
  if (model.taxonomy_version() != taxonomy.version()) {
    throw Error("model taxonomy version " + model.taxonomy_version() +
                " does not match taxonomy version " + taxonomy.version() +
                "; refusing to evaluate");
  }
  if (records.empty()) throw Error("evaluation corpus is empty");
  EvaluationScope scope;
  const LanguageGroup group = model.group();
  const auto batch = static_cast<std::size_t>(std::max(1, options.batch_size));

  EvalResult out;
  out.predictions.reserve(records.size());
  for (std::size_t start = 0; start < records.size(); start += batch) {
    const std::size_t end = std::min(records.size(), start + batch);
    std::vector<PreparedExample> examples;
    for (std::size_t i = start; i < end; ++i) {
      const ManifestRecord& rec = records[i];
      if (!rec.label) throw Error("record " + rec.utterance_id + " has no label");
      PreparedExample ex = prepare(rec, taxonomy, group, options.prepare);
      if (options.snr_db && mean_power(ex.waveform) > 0.0) {
        Rng rng = seeded_rng(options.noise_seed,
                             "eval-noise/" + rec.utterance_id);
        ex.waveform = add_gaussian_noise(ex.waveform, *options.snr_db, rng);
      }
      examples.push_back(std::move(ex));
    }
    std::vector<std::span<const float>> waves;
    std::vector<std::string> ids;
    for (const auto& ex : examples) {
      waves.emplace_back(ex.waveform);
      ids.push_back(ex.utterance_id);
    }
    const auto preds = model.predict_batch(waves, ids);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      ScoredUtterance s;
      s.utterance_id = preds[i].utterance_id;
      s.label = examples[i].label;
      s.predicted = preds[i].argmax;
      s.max_probability = preds[i].max_probability;
      s.duration_s = records[start + i].duration_s;
      s.probabilities = preds[i].probabilities;
      out.predictions.push_back(std::move(s));
    }
  }
  out.report = make_report(out.predictions, model.labels(),
                           std::string(group_id(group)));
  return out;
}

}  // namespace voxlect
