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

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voxlect/robustness.hpp"
#include "voxlect/synth.hpp"

namespace voxlect {
namespace {

ScoredUtterance row(std::string id, int label, int pred, double dur = 4.0) {
  ScoredUtterance s;
  s.utterance_id = std::move(id);
  s.label = label;
  s.predicted = pred;
  s.duration_s = dur;
  s.max_probability = 0.9;
  s.probabilities = {0.5, 0.5};
  return s;
}

// n utterances, alternating labels, the first round(acc * n) predicted right.
std::vector<ScoredUtterance> dump(int n, double acc) {
  std::vector<ScoredUtterance> out;
  const int right = static_cast<int>(std::lround(acc * n));
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    out.push_back(row("u" + std::to_string(i), y, i < right ? y : 1 - y));
  }
  return out;
}

TEST(Robustness, ConditionNames) {
  EXPECT_EQ(condition_name(std::nullopt), "clean");
  EXPECT_EQ(condition_name(25.0), "snr25");
  EXPECT_EQ(condition_name(5.0), "snr5");
}

TEST(Robustness, LengthBoundaryIsShort) {
  const std::vector<ScoredUtterance> rows = {row("a", 0, 0, 3.0), row("b", 1, 1, 6.0),
                                             row("c", 0, 1, 7.0)};
  const auto s = length_stratified_eval(rows, {"x", "y"}, "thai");
  ASSERT_EQ(s.short_rows.size(), 2u);
  ASSERT_EQ(s.long_rows.size(), 1u);
  EXPECT_EQ(s.long_rows[0].utterance_id, "c");
  EXPECT_TRUE(s.short_report.has_value());
  EXPECT_EQ(s.short_report->accuracy, 1.0);
  EXPECT_EQ(s.long_report->accuracy, 0.0);

  const auto only_short = length_stratified_eval(
      std::vector<ScoredUtterance>{row("a", 0, 0, 5.0)}, {"x", "y"}, "thai");
  EXPECT_FALSE(only_short.long_report.has_value());
}

TEST(Robustness, PartitionCoversEveryUtterance) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(3.0, 15.0);
  std::vector<ScoredUtterance> rows;
  for (int i = 0; i < 300; ++i) rows.push_back(row("u" + std::to_string(i), 0, 0, d(rng)));
  rows.push_back(row("edge", 0, 0, 6.0));
  const auto s = length_stratified_eval(rows, {"x", "y"}, "thai");
  EXPECT_EQ(s.short_rows.size() + s.long_rows.size(), rows.size());
  for (const auto& r : s.short_rows) EXPECT_LE(r.duration_s, 6.0);
  for (const auto& r : s.long_rows) EXPECT_GT(r.duration_s, 6.0);
}

TEST(Robustness, IdenticalDumpsNotSignificant) {
  const std::vector<ConditionDump> a = {{"clean", dump(200, 0.8)}, {"snr5", dump(200, 0.6)}};
  BootstrapOptions o;
  o.resamples = 2000;
  const auto cmp = compare_models(a, a, 2, o);
  ASSERT_EQ(cmp.size(), 2u);
  for (const auto& c : cmp) {
    EXPECT_EQ(c.score_delta, 0.0);
    EXPECT_EQ(c.relative_delta, 0.0);
    EXPECT_FALSE(c.significant);
    EXPECT_FALSE(c.relative_significant);
  }
}

TEST(Robustness, NinetyVersusFiftyIsSignificant) {
  const std::vector<ConditionDump> a = {{"clean", dump(500, 0.9)}};
  const std::vector<ConditionDump> b = {{"clean", dump(500, 0.5)}};
  const auto cmp = compare_models(a, b, 2);
  ASSERT_EQ(cmp.size(), 1u);
  EXPECT_TRUE(cmp[0].significant);
  EXPECT_LT(cmp[0].p_value, 0.05);
  EXPECT_GT(cmp[0].score_delta, 0.3);
}

TEST(Robustness, SwappingModelsNegatesDeltas) {
  const std::vector<ConditionDump> a = {{"clean", dump(300, 0.9)}, {"snr15", dump(300, 0.7)}};
  const std::vector<ConditionDump> b = {{"clean", dump(300, 0.8)}, {"snr15", dump(300, 0.75)}};
  BootstrapOptions o;
  o.resamples = 1000;
  const auto ab = compare_models(a, b, 2, o);
  const auto ba = compare_models(b, a, 2, o);
  ASSERT_EQ(ab.size(), ba.size());
  for (std::size_t i = 0; i < ab.size(); ++i) {
    EXPECT_DOUBLE_EQ(ab[i].score_delta, -ba[i].score_delta);
    EXPECT_DOUBLE_EQ(ab[i].relative_delta, -ba[i].relative_delta);
    EXPECT_DOUBLE_EQ(ab[i].relative_change_a, ba[i].relative_change_b);
  }
  EXPECT_EQ(ab[0].relative_change_a, 0.0);
}

TEST(Robustness, BootstrapDeterministicPerSeed) {
  const std::vector<ConditionDump> a = {{"clean", dump(100, 0.7)}};
  const std::vector<ConditionDump> b = {{"clean", dump(100, 0.6)}};
  BootstrapOptions o;
  o.resamples = 500;
  o.seed = 9;
  EXPECT_EQ(compare_models(a, b, 2, o)[0].p_value, compare_models(a, b, 2, o)[0].p_value);
}

TEST(Robustness, MismatchedUtterancesRejected) {
  auto d = dump(50, 0.8);
  const std::vector<ConditionDump> a = {{"clean", d}};
  d[3].utterance_id = "other";
  const std::vector<ConditionDump> b = {{"clean", d}};
  EXPECT_THROW(compare_models(a, b, 2), Error);
  const std::vector<ConditionDump> c = {{"snr5", dump(50, 0.8)}};
  EXPECT_THROW(compare_models(a, c, 2), Error);
}

TEST(Robustness, NoiseSweepReportsCleanFirst) {
  testing::TempDir dir("sweep");
  SynthOptions so;
  so.num_speakers = 4;
  so.utterances_per_speaker = 1;
  so.max_duration_s = 3.2;
  so.test_fraction = 0.0;
  const auto recs = synthesize_corpus(dir.path(), Taxonomy::builtin(), so);
  DialectClassifier m(Taxonomy::builtin(), LanguageGroup::thai,
                      mock_backbone(testing::tiny_backbone()), testing::tiny_lora(),
                      testing::tiny_probe());
  std::vector<ManifestRecord> labelled;
  for (auto r : recs) {
    r.label = r.raw_label;
    labelled.push_back(r);
  }
  const auto sweep = noise_sweep(m, labelled, Taxonomy::builtin());
  ASSERT_EQ(sweep.size(), 4u);
  EXPECT_EQ(sweep[0].condition, "clean");
  EXPECT_EQ(sweep[0].delta_macro_f1, 0.0);
  EXPECT_EQ(sweep[3].condition, "snr5");
  EXPECT_EQ(*sweep[1].snr_db, 25.0);
  for (const auto& lvl : sweep) {
    EXPECT_EQ(lvl.eval.report.n_utterances, 4);
  }
}

}  // namespace
}  // namespace voxlect
