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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "voxlect/apps.hpp"
#include "voxlect/corpus.hpp"
#include "voxlect/metrics.hpp"
#include "voxlect/model.hpp"
#include "voxlect/report.hpp"
#include "voxlect/robustness.hpp"
#include "voxlect/synth.hpp"
#include "voxlect/taxonomy.hpp"
#include "voxlect/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voxlect;

namespace {

struct Globals {
  std::string taxonomy_dir;
};

const Taxonomy& load_taxonomy(const Globals& g) {
  static Taxonomy custom;
  if (g.taxonomy_dir.empty()) return Taxonomy::builtin();
  custom = Taxonomy::from_directory(g.taxonomy_dir);
  return custom;
}

void write_json(const fs::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string pct(double v) {
  if (!std::isfinite(v)) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100.0 * v << "%";
  return os.str();
}

std::string num(double v, int precision = 4) {
  if (!std::isfinite(v)) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::vector<double> parse_levels(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("invalid SNR level '" + item + "'");
    }
  }
  return out;
}

// Labelled records of `split` from `manifest`, ingesting raw labels when the
// manifest has not been through `corpus ingest`.
std::vector<ManifestRecord> load_eval_records(const fs::path& manifest,
                                              const Taxonomy& taxonomy,
                                              LanguageGroup group,
                                              const std::string& split) {
  auto records = read_manifest(manifest);
  const bool labelled = std::all_of(records.begin(), records.end(),
                                    [](const ManifestRecord& r) { return r.label; });
  if (!labelled) records = ingest(records, taxonomy, group).records;
  if (split == "all") return records;
  auto out = select_split(records, parse_split(split));
  if (out.empty()) {
    throw Error("manifest has no '" + split + "' records; use --split all");
  }
  return out;
}

struct EvalArgs {
  std::string checkpoint, manifest, out, split = "test", config;
  std::uint64_t seed = 0;
  bool no_truncate = false;
};

EvalOptions eval_options(const EvalArgs& a) {
  EvalOptions eo;
  if (!a.config.empty()) {
    const RunConfig cfg = load_run_config(a.config);
    eo.prepare = cfg.prepare_options();
  }
  if (a.no_truncate) eo.prepare.truncate = false;
  eo.noise_seed = a.seed;
  return eo;
}

json eval_fingerprint_config(const EvalArgs& a, const EvalOptions& eo) {
  return {{"checkpoint", fs::absolute(a.checkpoint).string()},
          {"manifest", fs::absolute(a.manifest).string()},
          {"split", a.split},
          {"truncate", eo.prepare.truncate},
          {"max_duration_s", eo.prepare.max_duration_s}};
}

void write_eval_bundle(const fs::path& dir, const EvalResult& ev,
                       const std::vector<std::string>& classes) {
  fs::create_directories(dir);
  write_json(dir / "eval_report.json", to_json(ev.report));
  write_prediction_dump(dir / "predictions.jsonl", ev.predictions, classes);
  write_file_atomic(dir / "confusion.csv",
                    confusion_csv(ev.report.confusion, classes));
}

void print_report(const EvalReport& r) {
  std::cout << "utterances  " << r.n_utterances << "\n"
            << "accuracy    " << num(r.accuracy) << "\n"
            << "macro_f1    " << num(r.macro_f1) << "\n";
  for (const auto& p : r.top_confusion_pairs) {
    std::cout << "  " << r.class_names[p.true_class] << " -> "
              << r.class_names[p.predicted_class] << "  " << pct(p.rate) << "\n";
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

// ---- taxonomy ----

int cmd_taxonomy_validate(const Globals& g) {
  const Taxonomy& t = load_taxonomy(g);
  const auto problems = t.validate();
  for (const auto& p : problems) std::cout << p << "\n";
  if (!problems.empty()) {
    throw Error("taxonomy has " + std::to_string(problems.size()) +
                " consistency violation(s)");
  }
  std::cout << "taxonomy " << t.version() << ": " << kAllGroups.size()
            << " groups consistent\n";
  return 0;
}

int cmd_taxonomy_show(const Globals& g, const std::string& group) {
  const Taxonomy& t = load_taxonomy(g);
  for (LanguageGroup lg : kAllGroups) {
    if (!group.empty() && parse_group(group) != lg) continue;
    std::cout << group_id(lg) << " (" << t.num_classes(lg) << " classes)\n";
    for (const auto& l : t.canonical_labels(lg)) {
      std::cout << "  " << l.index << "  " << l.name << "\n";
    }
    std::cout << "  datasets:";
    for (const auto& d : t.dataset_ids(lg)) std::cout << " " << d;
    std::cout << "\n";
  }
  return 0;
}

// ---- corpus ----

struct IngestArgs {
  std::string manifest, group, out;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool no_subsample = false;
  int max_per_speaker = 0;  // 0: default per-dataset policy
};

int cmd_corpus_ingest(const Globals& g, const IngestArgs& a) {
  const Taxonomy& t = load_taxonomy(g);
  const LanguageGroup group = parse_group(a.group);
  IngestResult res = ingest(fs::path(a.manifest), t, group);
  std::vector<ManifestRecord> records = std::move(res.records);
  if (a.max_per_speaker > 0) {
    records = subsample_per_speaker(std::move(records), a.max_per_speaker, a.seed);
  } else if (!a.no_subsample) {
    const auto& policy = default_subsample_policy();
    std::vector<ManifestRecord> kept, capped;
    for (auto& r : records) {
      (policy.count(r.dataset_id) ? capped : kept).push_back(std::move(r));
    }
    for (const auto& [dataset, cap] : policy) {
      std::vector<ManifestRecord> subset;
      for (auto& r : capped) {
        if (r.dataset_id == dataset) subset.push_back(std::move(r));
      }
      subset = subsample_per_speaker(std::move(subset), cap, a.seed);
      kept.insert(kept.end(), subset.begin(), subset.end());
    }
    records = std::move(kept);
  }
  records = assign_splits(std::move(records), a.test_fraction, a.seed);

  const fs::path out = a.out;
  fs::create_directories(out);
  write_manifest(out / "manifest.jsonl", records);
  write_exclusions(out / "exclusions.jsonl", res.exclusions);
  json dist;
  const auto counts = class_distribution(records, t, group);
  for (const auto& l : t.canonical_labels(group)) dist[l.name] = counts[l.index];
  write_json(out / "class_distribution.json", dist);
  write_fingerprint(out, "corpus ingest",
                    {{"manifest", fs::absolute(a.manifest).string()},
                     {"group", a.group},
                     {"test_fraction", a.test_fraction},
                     {"subsample", !a.no_subsample},
                     {"max_per_speaker", a.max_per_speaker}},
                    a.seed, t.version());
  std::size_t n_test = 0;
  for (const auto& r : records) n_test += r.split == Split::test;
  std::cout << "kept " << records.size() << " (test " << n_test << "), excluded "
            << res.exclusions.size() << "\n";
  return 0;
}

struct SynthArgs {
  std::string out, group = "thai";
  std::uint64_t seed = 0;
  int speakers = 50, per_speaker = 10;
  double min_s = 3.0, max_s = 10.0;
};

int cmd_corpus_synth(const Globals& g, const SynthArgs& a) {
  const Taxonomy& t = load_taxonomy(g);
  SynthOptions o;
  o.group = parse_group(a.group);
  o.num_speakers = a.speakers;
  o.utterances_per_speaker = a.per_speaker;
  o.min_duration_s = a.min_s;
  o.max_duration_s = a.max_s;
  o.seed = a.seed;
  const auto records = synthesize_corpus(a.out, t, o);
  write_fingerprint(a.out, "corpus synth",
                    {{"group", a.group},
                     {"speakers", a.speakers},
                     {"per_speaker", a.per_speaker},
                     {"min_duration_s", a.min_s},
                     {"max_duration_s", a.max_s}},
                    a.seed, t.version());
  std::cout << "wrote " << records.size() << " utterances to "
            << (fs::path(a.out) / "manifest.jsonl").string() << "\n";
  return 0;
}

// ---- train / evaluate ----

struct TrainArgs {
  std::string config, out;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_augment = false;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  RunConfig cfg = load_run_config(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got " + kv);
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed_set) cfg.seed = a.seed;
  if (a.no_augment) cfg.augment = false;
  if (!a.out.empty()) cfg.output_dir = a.out;
  cfg.validate();
  const Taxonomy& t = load_taxonomy(g);
  const IngestResult corpus = prepare_corpus(cfg, t);
  fs::create_directories(cfg.output_dir);
  write_manifest(cfg.output_dir / "manifest.resolved.jsonl", corpus.records);
  write_exclusions(cfg.output_dir / "exclusions.jsonl", corpus.exclusions);
  write_fingerprint(cfg.output_dir, "train", cfg.to_json(), cfg.seed, t.version());

  const TrainResult res = train(cfg, corpus.records, t);
  for (const auto& e : res.epochs) {
    std::cout << "epoch " << e.epoch << "  loss " << num(e.train_loss)
              << "  val_macro_f1 " << num(e.val_macro_f1)
              << (e.best ? "  *" : "") << "\n";
  }
  std::cout << "best epoch " << res.best_epoch << ", checkpoint "
            << res.best_checkpoint.string() << "\n";
  return 0;
}

int cmd_evaluate(const Globals& g, const EvalArgs& a) {
  const Taxonomy& t = load_taxonomy(g);
  const DialectClassifier model = DialectClassifier::load(a.checkpoint, t);
  const auto records = load_eval_records(a.manifest, t, model.group(), a.split);
  const EvalOptions eo = eval_options(a);
  EvalResult ev = evaluate(model, records, t, eo);
  const json cfg = eval_fingerprint_config(a, eo);
  ev.report.fingerprint = cfg;
  write_eval_bundle(a.out, ev, model.labels());
  write_fingerprint(a.out, "evaluate", cfg, a.seed, t.version());
  print_report(ev.report);
  return 0;
}

// ---- robustness ----

struct RobustArgs : EvalArgs {
  std::string snr = "25,15,5";
  double length_threshold = kDefaultLengthThresholdS;
  std::string compare;
  int resamples = 10000;
};

std::vector<ConditionDump> dumps_of(const std::vector<NoiseLevelResult>& sweep) {
  std::vector<ConditionDump> out;
  for (const auto& l : sweep) out.push_back({l.condition, l.eval.predictions});
  return out;
}

int cmd_robustness(const Globals& g, const RobustArgs& a) {
  const Taxonomy& t = load_taxonomy(g);
  const DialectClassifier model = DialectClassifier::load(a.checkpoint, t);
  const auto records = load_eval_records(a.manifest, t, model.group(), a.split);
  const EvalOptions eo = eval_options(a);
  const auto levels = parse_levels(a.snr);
  const fs::path out = a.out;
  fs::create_directories(out);

  const auto sweep = noise_sweep(model, records, t, levels, eo);
  json summary = {{"noise", json::array()}};
  std::cout << "condition  macro_f1  accuracy  relative_change\n";
  for (const auto& l : sweep) {
    write_eval_bundle(out / l.condition, l.eval, model.labels());
    summary["noise"].push_back(
        {{"condition", l.condition},
         {"snr_db", l.snr_db ? json(*l.snr_db) : json(nullptr)},
         {"macro_f1", l.eval.report.macro_f1},
         {"accuracy", l.eval.report.accuracy},
         {"delta_macro_f1", l.delta_macro_f1},
         {"relative_change",
          std::isfinite(l.relative_change) ? json(l.relative_change) : json(nullptr)}});
    std::cout << std::left << std::setw(11) << l.condition
              << std::setw(10) << num(l.eval.report.macro_f1)
              << std::setw(10) << num(l.eval.report.accuracy)
              << pct(l.relative_change) << "\n";
  }

  const auto strata = length_stratified_eval(
      sweep.front().eval.predictions, model.labels(),
      std::string(group_id(model.group())), a.length_threshold);
  auto stratum = [](const std::optional<EvalReport>& r, std::size_t n) {
    json j = {{"n_utterances", n}};
    if (r) {
      j["macro_f1"] = r->macro_f1;
      j["accuracy"] = r->accuracy;
    } else {
      j["absent"] = true;
    }
    return j;
  };
  summary["length"] = {{"threshold_s", a.length_threshold},
                       {"rule", "duration <= threshold is short"},
                       {"short", stratum(strata.short_report, strata.short_rows.size())},
                       {"long", stratum(strata.long_report, strata.long_rows.size())}};
  std::cout << "short (<= " << a.length_threshold << " s): "
            << strata.short_rows.size() << " utts, macro_f1 "
            << (strata.short_report ? num(strata.short_report->macro_f1) : "absent")
            << "\nlong: " << strata.long_rows.size() << " utts, macro_f1 "
            << (strata.long_report ? num(strata.long_report->macro_f1) : "absent")
            << "\n";

  json cfg = eval_fingerprint_config(a, eo);
  cfg["snr_levels_db"] = levels;
  cfg["length_threshold_s"] = a.length_threshold;
  if (!a.compare.empty()) {
    const DialectClassifier other = DialectClassifier::load(a.compare, t);
    if (other.group() != model.group()) {
      throw Error("compared checkpoints belong to different language groups");
    }
    const auto sweep_b = noise_sweep(other, records, t, levels, eo);
    BootstrapOptions bo;
    bo.resamples = a.resamples;
    bo.seed = a.seed;
    const auto cmp = compare_models(dumps_of(sweep), dumps_of(sweep_b),
                                    model.num_classes(), bo);
    summary["comparison"] = json::array();
    std::cout << "condition  delta(A-B)  p      rel_delta  p\n";
    for (const auto& c : cmp) {
      summary["comparison"].push_back(to_json(c));
      std::cout << std::left << std::setw(11) << c.condition << std::setw(12)
                << (num(c.score_delta) + (c.significant ? "*" : ""))
                << std::setw(7) << num(c.p_value, 3) << std::setw(11)
                << (pct(c.relative_delta) + (c.relative_significant ? "*" : ""))
                << num(c.relative_p_value, 3) << "\n";
    }
    cfg["compare_checkpoint"] = fs::absolute(a.compare).string();
    cfg["bootstrap_resamples"] = a.resamples;
  }
  write_json(out / "summary.json", summary);
  write_fingerprint(out, "robustness", cfg, a.seed, t.version());
  return 0;
}

// ---- report ----

int cmd_report(const std::string& eval_dir, bool plots) {
  const fs::path dir = eval_dir;
  const fs::path report_path = dir / "eval_report.json";
  if (!fs::exists(report_path)) {
    throw Error("no eval_report.json in " + dir.string());
  }
  const EvalReport r = report_from_json(json::parse(read_file(report_path)));
  std::cout << "group       " << r.group << "\n";
  print_report(r);
  std::cout << "class          precision  recall  f1      support\n";
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& m = r.per_class[k];
    std::cout << std::left << std::setw(15) << r.class_names[k] << std::setw(11)
              << num(m.precision) << std::setw(8) << num(m.recall)
              << std::setw(8) << num(m.f1) << m.support << "\n";
  }
  if (plots) {
    std::vector<double> support;
    for (const auto& m : r.per_class) support.push_back(static_cast<double>(m.support));
    const fs::path pd = dir / "plots";
    fs::create_directories(pd);
    write_file_atomic(pd / "class_distribution.svg",
                      bar_chart_svg(r.group + ": test utterances per class",
                                    r.class_names, support));
    write_file_atomic(pd / "confusion.svg",
                      confusion_heatmap_svg(r.group + ": confusion (% of true class)",
                                            r.confusion, r.class_names));
    std::cout << "plots written to " << pd.string() << "\n";
  }
  return 0;
}

// ---- apps ----

struct AsrArgs {
  std::string records, checkpoint, out, tokenization;
  double gate = kDefaultGate;
  std::uint64_t seed = 0;
};

int cmd_app_asr(const Globals& g, const AsrArgs& a) {
  const Taxonomy& t = load_taxonomy(g);
  const DialectClassifier model = DialectClassifier::load(a.checkpoint, t);
  const auto recs = read_asr_records(a.records);
  std::optional<Tokenization> tok;
  if (!a.tokenization.empty()) tok = parse_tokenization(a.tokenization);
  const StratifiedWer s = dialect_stratified_wer(recs, model, a.gate, tok);
  auto print = [](const char* title, const std::vector<WerCell>& cells) {
    std::cout << title << "\n";
    for (const auto& c : cells) {
      std::cout << "  " << std::left << std::setw(28) << c.dialect << std::setw(6)
                << c.n_utterances << "avg " << std::setw(8) << num(c.mean_wer)
                << "pooled " << num(c.pooled_wer) << "\n";
    }
  };
  std::cout << "tokenization " << tokenization_name(s.tokenization) << ", retained "
            << s.n_retained << "/" << s.n_total << " (" << pct(s.retention_fraction)
            << ") with probability > " << a.gate << "\n";
  print("by ground truth", s.by_ground_truth);
  print("by prediction", s.by_prediction);
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_json(fs::path(a.out) / "asr_wer.json", to_json(s));
    write_fingerprint(a.out, "app asr",
                      {{"records", fs::absolute(a.records).string()},
                       {"checkpoint", fs::absolute(a.checkpoint).string()},
                       {"gate", a.gate},
                       {"tokenization", tokenization_name(s.tokenization)}},
                      a.seed, t.version());
  }
  return 0;
}

struct TtsArgs {
  std::string audio_dir, target, checkpoint, out;
  std::uint64_t seed = 0;
};

int cmd_app_tts(const Globals& g, const TtsArgs& a) {
  const Taxonomy& t = load_taxonomy(g);
  const DialectClassifier model = DialectClassifier::load(a.checkpoint, t);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.audio_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no .wav files in " + a.audio_dir);
  const TtsScore s = tts_dialect_score(files, a.target, model);
  std::cout << s.target << ": " << num(s.percent(), 1) << "% over "
            << s.n_utterances << " utterances\n";
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_json(fs::path(a.out) / "tts_score.json",
               {{"target", s.target},
                {"n_utterances", s.n_utterances},
                {"mean_probability", s.mean_probability},
                {"percent", s.percent()}});
    write_fingerprint(a.out, "app tts",
                      {{"audio_dir", fs::absolute(a.audio_dir).string()},
                       {"target", a.target},
                       {"checkpoint", fs::absolute(a.checkpoint).string()}},
                      a.seed, t.version());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dialect classification toolkit", "voxlect"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());
  Globals g;
  app.add_option("--taxonomy-dir", g.taxonomy_dir,
                 "Load taxonomy JSON files from this directory")
      ->check(CLI::ExistingDirectory);

  std::function<int()> run;

  auto* tax = app.add_subcommand("taxonomy", "Inspect the dialect taxonomy");
  tax->require_subcommand(1);
  tax->add_subcommand("validate", "Check class counts and label maps")
      ->callback([&] { run = [&] { return cmd_taxonomy_validate(g); }; });
  std::string show_group;
  auto* show = tax->add_subcommand("show", "List classes and datasets");
  show->add_option("group", show_group, "Language group id (all when omitted)");
  show->callback([&] { run = [&] { return cmd_taxonomy_show(g, show_group); }; });

  auto* corpus = app.add_subcommand("corpus", "Manifest preparation");
  corpus->require_subcommand(1);
  IngestArgs ia;
  auto* ing = corpus->add_subcommand("ingest", "Map labels, filter, split");
  ing->add_option("--manifest", ia.manifest, "Input manifest (JSONL)")->required();
  ing->add_option("--group", ia.group, "Language group id")->required();
  ing->add_option("--out", ia.out, "Output directory")->required();
  ing->add_option("--test-fraction", ia.test_fraction, "Test speaker fraction");
  ing->add_option("--seed", ia.seed, "Random seed");
  ing->add_flag("--no-subsample", ia.no_subsample, "Skip per-speaker caps");
  ing->add_option("--max-per-speaker", ia.max_per_speaker,
                  "Cap every speaker at this many utterances")
      ->check(CLI::PositiveNumber);
  ing->callback([&] { run = [&] { return cmd_corpus_ingest(g, ia); }; });
  SynthArgs sa;
  auto* syn = corpus->add_subcommand("synth", "Generate a synthetic corpus");
  syn->add_option("--out", sa.out, "Output directory")->required();
  syn->add_option("--group", sa.group, "Language group whose labels are used");
  syn->add_option("--seed", sa.seed, "Random seed");
  syn->add_option("--speakers", sa.speakers, "Number of speakers");
  syn->add_option("--per-speaker", sa.per_speaker, "Utterances per speaker");
  syn->add_option("--min-duration", sa.min_s, "Shortest clip in seconds");
  syn->add_option("--max-duration", sa.max_s, "Longest clip in seconds");
  syn->callback([&] { run = [&] { return cmd_corpus_synth(g, sa); }; });

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Fine-tune probe and LoRA adapters");
  tr->add_option("--config", ta.config, "Run configuration file")->required();
  tr->add_option("--set", ta.overrides, "Override a config key (key=value)");
  tr->add_option("--seed", ta.seed, "Override the config seed")
      ->each([&](const std::string&) { ta.seed_set = true; });
  tr->add_option("--out", ta.out, "Override the output directory");
  tr->add_flag("--no-augment", ta.no_augment, "Disable training augmentation");
  tr->callback([&] { run = [&] { return cmd_train(g, ta); }; });

  auto add_eval_options = [](CLI::App* c, EvalArgs& a) {
    c->add_option("--checkpoint", a.checkpoint, "Checkpoint directory")->required();
    c->add_option("--manifest", a.manifest, "Evaluation manifest")->required();
    c->add_option("--out", a.out, "Output directory");
    c->add_option("--split", a.split, "test, train, unassigned or all");
    c->add_option("--config", a.config, "Run configuration for preprocessing");
    c->add_option("--seed", a.seed, "Seed for evaluation-time noise");
    c->add_flag("--no-truncate", a.no_truncate, "Score full-length audio");
  };
  EvalArgs ea;
  ea.out = "eval";
  auto* ev = app.add_subcommand("evaluate", "Score a checkpoint on a manifest");
  add_eval_options(ev, ea);
  ev->callback([&] { run = [&] { return cmd_evaluate(g, ea); }; });

  RobustArgs ra;
  ra.out = "robustness";
  auto* rb = app.add_subcommand("robustness", "Noise sweep and length strata");
  add_eval_options(rb, ra);
  rb->add_option("--snr", ra.snr, "Comma-separated SNR levels in dB");
  rb->add_option("--length-threshold", ra.length_threshold, "Short-utterance bound (s)");
  rb->add_option("--compare", ra.compare, "Second checkpoint for significance tests");
  rb->add_option("--resamples", ra.resamples, "Bootstrap resamples");
  rb->callback([&] { run = [&] { return cmd_robustness(g, ra); }; });

  std::string eval_dir;
  bool plots = false;
  auto* rp = app.add_subcommand("report", "Summarise an evaluation directory");
  rp->add_option("--eval-dir", eval_dir, "Directory with eval_report.json")->required();
  rp->add_flag("--plots", plots, "Write SVG figures");
  rp->callback([&] { run = [&] { return cmd_report(eval_dir, plots); }; });

  auto* apps = app.add_subcommand("app", "Downstream applications");
  apps->require_subcommand(1);
  AsrArgs aa;
  auto* asr = apps->add_subcommand("asr", "Dialect-stratified WER");
  asr->add_option("--records", aa.records, "ASR records (JSONL)")->required();
  asr->add_option("--checkpoint", aa.checkpoint, "Checkpoint directory")->required();
  asr->add_option("--gate", aa.gate, "Keep predictions with probability above this");
  asr->add_option("--tokenization", aa.tokenization, "whitespace or character");
  asr->add_option("--out", aa.out, "Output directory");
  asr->add_option("--seed", aa.seed, "Recorded in the fingerprint");
  asr->callback([&] { run = [&] { return cmd_app_asr(g, aa); }; });
  TtsArgs tsa;
  auto* tts = apps->add_subcommand("tts", "Dialect score of generated speech");
  tts->add_option("--audio-dir", tsa.audio_dir, "Directory of .wav files")->required();
  tts->add_option("--target", tsa.target, "Target dialect name")->required();
  tts->add_option("--checkpoint", tsa.checkpoint, "Checkpoint directory")->required();
  tts->add_option("--out", tsa.out, "Output directory");
  tts->add_option("--seed", tsa.seed, "Recorded in the fingerprint");
  tts->callback([&] { run = [&] { return cmd_app_tts(g, tsa); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << "\n" << app.help();
    return 2;
  }
  try {
    return run ? run() : 2;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "voxlect: error: " << msg << "\n";
    return 1;
  }
}
