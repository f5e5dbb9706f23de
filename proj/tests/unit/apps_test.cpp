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
#include <functional>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voxlect/apps.hpp"
#include "voxlect/audio.hpp"

namespace voxlect {
namespace {

// Memoised recursion over (i, j), independent of the library's DP.
std::size_t oracle_distance(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  std::function<long(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> long {
    if (i == 0) return static_cast<long>(j);
    if (j == 0) return static_cast<long>(i);
    long& m = memo[i][j];
    if (m >= 0) return m;
    m = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1,
                  d(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return m;
  };
  return static_cast<std::size_t>(d(a.size(), b.size()));
}

TEST(Wer, Examples) {
  EXPECT_DOUBLE_EQ(wer("a b c", "a x c"), 1.0 / 3.0);
  EXPECT_EQ(wer("a b c", "a b c"), 0.0);
  EXPECT_DOUBLE_EQ(wer("a", "a b c"), 2.0);
  EXPECT_EQ(wer("", ""), 0.0);
  EXPECT_EQ(wer("", "x"), kUndefinedWer);
  EXPECT_DOUBLE_EQ(wer("a b", ""), 1.0);
}

TEST(Wer, CharacterTokenization) {
  const auto t = tokenize("你好 世界", Tokenization::character);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], "你");
  EXPECT_EQ(t[3], "界");
  EXPECT_DOUBLE_EQ(wer("你好世界", "你坏世界", Tokenization::character), 0.25);
  EXPECT_EQ(default_tokenization(LanguageGroup::mandarin_cantonese), Tokenization::character);
  EXPECT_EQ(default_tokenization(LanguageGroup::german), Tokenization::whitespace);
  EXPECT_EQ(tokenize("  a\tb \n c ", Tokenization::whitespace).size(), 3u);
}

TEST(Wer, MatchesOracleOn1000Pairs) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "ee"};
  auto random_tokens = [&] {
    std::vector<std::string> out(rng() % 12);
    for (auto& t : out) t = vocab[rng() % vocab.size()];
    return out;
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& t : v) s += (s.empty() ? "" : " ") + t;
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    auto ref = random_tokens();
    if (ref.empty()) ref.push_back("a");
    const auto hyp = random_tokens();
    const std::size_t d = oracle_distance(ref, hyp);
    ASSERT_EQ(edit_distance(ref, hyp), d);
    ASSERT_EQ(wer(join(ref), join(hyp)), static_cast<double>(d) / ref.size());
  }
}

TEST(Gate, StrictInequality) {
  const std::vector<double> p = {0.8, 0.6, 0.71, 0.7};
  EXPECT_EQ(gate_indices(p, 0.7), (std::vector<std::size_t>{0, 2}));
  EXPECT_DOUBLE_EQ(retention_fraction(p, 0.7), 0.5);
}

TEST(Gate, RetentionMonotoneInThreshold) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + rng() % 50);
    for (auto& v : p) v = u(rng);
    double prev = 1.1;
    for (double g = 0.0; g <= 1.0; g += 0.01) {
      const double r = retention_fraction(p, g);
      ASSERT_LE(r, prev);
      prev = r;
    }
  }
}

AsrScored scored(std::string truth, std::string pred, double p, std::size_t err,
                 std::size_t tok) {
  AsrScored s;
  s.utterance_id = truth + pred + std::to_string(err);
  s.truth = std::move(truth);
  s.predicted = std::move(pred);
  s.max_probability = p;
  s.errors = err;
  s.ref_tokens = tok;
  s.wer = tok ? double(err) / tok : (err ? kUndefinedWer : 0.0);
  return s;
}

TEST(StratifiedWer, BothAveragesAndGating) {
  const std::vector<AsrScored> rows = {scored("A", "A", 0.9, 1, 2),
                                       scored("A", "B", 0.6, 3, 10),
                                       scored("B", "B", 0.95, 0, 4)};
  const auto s = stratify_wer(rows, 0.7, Tokenization::whitespace, {"A", "B", "C"});
  ASSERT_EQ(s.by_ground_truth.size(), 2u);
  EXPECT_EQ(s.by_ground_truth[0].dialect, "A");
  EXPECT_DOUBLE_EQ(s.by_ground_truth[0].mean_wer, (0.5 + 0.3) / 2);
  EXPECT_DOUBLE_EQ(s.by_ground_truth[0].pooled_wer, 4.0 / 12.0);
  EXPECT_EQ(s.n_retained, 2);
  EXPECT_NEAR(s.retention_fraction, 2.0 / 3.0, 1e-12);
  ASSERT_EQ(s.by_prediction.size(), 2u);
  EXPECT_EQ(s.by_prediction[1].n_utterances, 1);

  const auto none = stratify_wer(rows, 0.99, Tokenization::whitespace, {"A", "B"});
  EXPECT_TRUE(none.by_prediction.empty());
  EXPECT_FALSE(none.warnings.empty());
}

TEST(Tts, MeanOfTargetProbability) {
  std::vector<Prediction> preds(3);
  preds[0].probabilities = {0.1, 0.9};
  preds[1].probabilities = {0.4, 0.6};
  preds[2].probabilities = {0.75, 0.25};
  EXPECT_NEAR(tts_dialect_score(preds, 1), (0.9 + 0.6 + 0.25) / 3.0, 1e-12);
  EXPECT_THROW(tts_dialect_score(preds, 2), Error);
}

TEST(Tts, RiggedModelScoresHundredPercent) {
  testing::TempDir dir("tts");
  DialectClassifier m(Taxonomy::builtin(), LanguageGroup::mandarin_cantonese,
                      mock_backbone(testing::tiny_backbone()), testing::tiny_lora(),
                      testing::tiny_probe());
  const int target = Taxonomy::builtin().label(LanguageGroup::mandarin_cantonese, "Cantonese").index;
  for (auto& p : m.trainable_parameters()) {
    if (p.name == "probe.head.1.bias") (*p.value)(0, target) = 1e4;
  }
  std::vector<std::filesystem::path> files;
  for (int i = 0; i < 3; ++i) {
    files.push_back(dir / ("g" + std::to_string(i) + ".wav"));
    write_wav(files.back(), testing::random_wave(16000 * 3, i), 16000);
  }
  const TtsScore s = tts_dialect_score(files, "Cantonese", m);
  EXPECT_EQ(s.n_utterances, 3);
  EXPECT_DOUBLE_EQ(s.percent(), 100.0);
  EXPECT_THROW(tts_dialect_score(files, "Klingon", m), Error);
}

}  // namespace
}  // namespace voxlect
