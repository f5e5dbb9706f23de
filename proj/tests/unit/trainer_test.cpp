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

#include <fstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voxlect/synth.hpp"
#include "voxlect/trainer.hpp"

namespace voxlect {
namespace {

using testing::TempDir;

TEST(RunConfig, ParsesKeysCommentsAndLists) {
  const RunConfig c = parse_run_config(
      "# run\n"
      "group = arabic\n"
      "seed = 7   # trailing\n"
      "learning_rate = 1e-4\n"
      "manifest = data/m.jsonl\n"
      "lora.targets = blocks.0.ffn.fc1, blocks.1.ffn.fc2\n"
      "probe.conv_channels = 8,8,16\n"
      "aug.snr_low_db = 5\n"
      "augment = false\n",
      "/base");
  EXPECT_EQ(c.group, "arabic");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 1e-4);
  EXPECT_EQ(c.manifest, std::filesystem::path("/base/data/m.jsonl"));
  EXPECT_EQ(c.lora_targets.size(), 2u);
  EXPECT_EQ(c.conv_channels, (std::vector<int>{8, 8, 16}));
  EXPECT_DOUBLE_EQ(c.augmentation.snr_low_db, 5.0);
  EXPECT_FALSE(c.augment);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_run_config("group = thai\nbogus = 1\n"), Error);
  EXPECT_THROW(parse_run_config("group = thai\nseed = abc\n"), Error);
  EXPECT_THROW(parse_run_config("no equals sign\n"), Error);
  RunConfig c;
  EXPECT_THROW(c.validate(), Error);
  c.group = "thai";
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(RunConfig, EpochAndBatchSchedules) {
  RunConfig c;
  for (const char* g : {"thai", "arabic"}) {
    c.group = g;
    EXPECT_EQ(c.resolved_epochs(), 5);
  }
  for (const char* g : {"english", "indic", "german", "mandarin_cantonese"}) {
    c.group = g;
    EXPECT_EQ(c.resolved_epochs(), 15);
  }
  c.epochs = 2;
  EXPECT_EQ(c.resolved_epochs(), 2);
  EXPECT_EQ(c.resolved_batch_size(), 16);
  c.backbone_id = "facebook/mms-lid-256";
  EXPECT_EQ(c.resolved_batch_size(), 6);
  c.batch_size = 3;
  EXPECT_EQ(c.resolved_batch_size(), 3);
}

TEST(RunConfig, LoraAlphaDefaultsToRank) {
  RunConfig c;
  c.lora_rank = 8;
  EXPECT_DOUBLE_EQ(c.lora_options().alpha, 8.0);
  c.lora_alpha = 16.0;
  EXPECT_DOUBLE_EQ(c.lora_options().alpha, 16.0);
}

TEST(RunConfig, MissingFile) {
  try {
    load_run_config("/nonexistent/run.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("config not found", 0), 0u);
  }
}

// Two steps against the closed-form Adam recursion.
TEST(AdamW, MatchesHandComputation) {
  Matrix p(1, 2);
  p << 1.0, -2.0;
  std::vector<NamedParameter> params = {{"p", &p}};
  OptimizerConfig oc;
  AdamW opt(0.1, oc);
  Matrix g1(1, 2), g2(1, 2);
  g1 << 0.5, -1.0;
  g2 << -0.25, 2.0;
  opt.step(params, std::vector<Matrix>{g1});
  std::vector<double> want = {1.0, -2.0};
  for (int i = 0; i < 2; ++i) {
    const double m = 0.1 * g1(0, i), v = 0.001 * g1(0, i) * g1(0, i);
    want[i] -= 0.1 * (m / 0.1) / (std::sqrt(v / 0.001) + 1e-8);
  }
  EXPECT_NEAR(p(0, 0), want[0], 1e-12);
  EXPECT_NEAR(p(0, 1), want[1], 1e-12);
  opt.step(params, std::vector<Matrix>{g2});
  for (int i = 0; i < 2; ++i) {
    const double m = 0.9 * 0.1 * g1(0, i) + 0.1 * g2(0, i);
    const double v = 0.999 * 0.001 * g1(0, i) * g1(0, i) + 0.001 * g2(0, i) * g2(0, i);
    const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
    want[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(p(0, 0), want[0], 1e-12);
  EXPECT_NEAR(p(0, 1), want[1], 1e-12);
  EXPECT_EQ(opt.steps(), 2);
}

TEST(AdamW, ClipsGlobalNorm) {
  Matrix a(1, 1), b(1, 1);
  a << 0.0;
  b << 0.0;
  std::vector<NamedParameter> params = {{"a", &a}, {"b", &b}};
  OptimizerConfig oc;
  oc.grad_clip = 1.0;
  AdamW opt(1.0, oc);
  Matrix ga(1, 1), gb(1, 1);
  ga << 3.0;
  gb << 4.0;
  opt.step(params, std::vector<Matrix>{ga, gb});
  // Adam normalises magnitude away; the first step is lr * sign(g).
  EXPECT_NEAR(a(0, 0), -1.0, 1e-6);
  EXPECT_NEAR(b(0, 0), -1.0, 1e-6);
  EXPECT_THROW(opt.step(params, std::vector<Matrix>{ga}), Error);
}

RunConfig tiny_run(const std::filesystem::path& manifest,
                   const std::filesystem::path& out) {
  RunConfig c;
  c.group = "thai";
  c.backbone_id = testing::tiny_backbone().id();
  c.manifest = manifest;
  c.output_dir = out;
  c.seed = 3;
  c.epochs = 2;
  c.batch_size = 4;
  c.lora_rank = 4;
  c.conv_channels = {8, 8, 16};
  c.head_hidden = {16};
  return c;
}

TEST(Train, TinyRunWritesLogAndCheckpoints) {
  TempDir dir("train");
  SynthOptions so;
  so.num_speakers = 12;
  so.utterances_per_speaker = 2;
  so.max_duration_s = 3.5;
  so.seed = 5;
  synthesize_corpus(dir / "synth", Taxonomy::builtin(), so);
  const RunConfig cfg = tiny_run(dir / "synth" / "manifest.jsonl", dir / "run");
  const auto corpus = prepare_corpus(cfg, Taxonomy::builtin());
  const TrainResult r = train(cfg, corpus.records, Taxonomy::builtin());
  ASSERT_EQ(r.epochs.size(), 2u);
  EXPECT_TRUE(r.epochs[0].best);
  EXPECT_TRUE(std::filesystem::exists(r.best_checkpoint / "checkpoint.json"));
  EXPECT_TRUE(std::filesystem::exists(r.last_checkpoint / "checkpoint.json"));
  EXPECT_GT(r.n_validation, 0);
  const std::string log = read_file(r.log_path);
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 2);

  const auto model = DialectClassifier::load(r.best_checkpoint, Taxonomy::builtin());
  const auto test = select_split(corpus.records, Split::test);
  const EvalResult ev = evaluate(model, test, Taxonomy::builtin());
  EXPECT_EQ(ev.report.n_utterances, static_cast<std::int64_t>(test.size()));
  EXPECT_EQ(ev.report.class_names.size(), 4u);
}

// Test audio is never opened during training.
TEST(Train, NeverReadsTestRecords) {
  TempDir dir("train");
  SynthOptions so;
  so.num_speakers = 12;
  so.utterances_per_speaker = 1;
  so.max_duration_s = 3.2;
  so.seed = 6;
  synthesize_corpus(dir / "synth", Taxonomy::builtin(), so);
  RunConfig cfg = tiny_run(dir / "synth" / "manifest.jsonl", dir / "run");
  cfg.epochs = 1;
  auto records = prepare_corpus(cfg, Taxonomy::builtin()).records;
  for (auto& r : records) {
    if (r.split == Split::test) r.audio_path = "/nonexistent/" + r.utterance_id + ".wav";
  }
  EXPECT_NO_THROW(train(cfg, records, Taxonomy::builtin()));
}

TEST(Train, RejectsTrainTestOverlap) {
  TempDir dir("train");
  SynthOptions so;
  so.num_speakers = 8;
  so.utterances_per_speaker = 1;
  so.max_duration_s = 3.2;
  synthesize_corpus(dir / "synth", Taxonomy::builtin(), so);
  RunConfig cfg = tiny_run(dir / "synth" / "manifest.jsonl", dir / "run");
  auto records = prepare_corpus(cfg, Taxonomy::builtin()).records;
  auto dup = records.front();
  dup.split = dup.split == Split::train ? Split::test : Split::train;
  records.push_back(dup);
  EXPECT_THROW(train(cfg, records, Taxonomy::builtin()), Error);
}

TEST(Evaluate, RefusesTaxonomyVersionMismatch) {
  DialectClassifier m(Taxonomy::builtin(), LanguageGroup::thai,
                      mock_backbone(testing::tiny_backbone()), testing::tiny_lora(),
                      testing::tiny_probe());
  std::vector<std::string> docs;
  for (const auto& f : std::filesystem::directory_iterator(
           std::filesystem::path(VOXLECT_SOURCE_DIR) / "core/data/taxonomy")) {
    std::string text = read_file(f.path());
    const auto pos = text.find("\"1.0.0\"");
    if (pos != std::string::npos) text.replace(pos, 7, "\"2.0.0\"");
    docs.push_back(text);
  }
  const Taxonomy other = Taxonomy::from_documents(docs);
  ManifestRecord r;
  r.utterance_id = "x";
  r.label = "Thai-central";
  EXPECT_THROW(evaluate(m, std::vector{r}, other), Error);
}

}  // namespace
}  // namespace voxlect
