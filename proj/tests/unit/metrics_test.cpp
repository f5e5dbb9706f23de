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
#include "voxlect/metrics.hpp"

namespace voxlect {
namespace {

// Reference implementation straight from the pair list.
struct Oracle {
  double accuracy;
  double macro_f1;
};

Oracle brute_force(const std::vector<int>& y, const std::vector<int>& p, int k) {
  int correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += y[i] == p[i];
  double f1_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (p[i] == c && y[i] == c) ++tp;
      if (p[i] == c && y[i] != c) ++fp;
      if (p[i] != c && y[i] == c) ++fn;
    }
    const double prec = tp + fp ? double(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn ? double(tp) / (tp + fn) : 0.0;
    f1_sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  return {double(correct) / double(y.size()), f1_sum / k};
}

TEST(Metrics, ConfusionHandCount) {
  const std::vector<int> y = {0, 0, 1}, p = {0, 1, 1};
  const auto cm = confusion(y, p, 2);
  EXPECT_EQ(cm.counts, (std::vector<std::int64_t>{1, 1, 0, 1}));
  EXPECT_THROW(confusion(y, std::vector<int>{0, 1}, 2), Error);
  EXPECT_THROW(confusion(y, std::vector<int>{0, 1, 2}, 2), Error);
  const auto empty = confusion(std::vector<int>{}, std::vector<int>{}, 3);
  EXPECT_EQ(empty.total(), 0);
  EXPECT_THROW(accuracy(empty), Error);
  EXPECT_THROW(macro_f1(empty), Error);
}

TEST(Metrics, HandExamples) {
  const auto cm = confusion(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1}, 2);
  EXPECT_NEAR(macro_f1(cm), (2.0 / 3.0 + 4.0 / 5.0) / 2.0, 1e-12);
  EXPECT_NEAR(macro_f1(cm), 0.7333333333, 1e-9);
  EXPECT_DOUBLE_EQ(accuracy(cm), 0.75);
  const auto one = confusion(std::vector<int>{0, 0, 1, 1}, std::vector<int>{1, 1, 1, 1}, 2);
  EXPECT_DOUBLE_EQ(accuracy(one), 0.5);
  EXPECT_NEAR(macro_f1(one), 1.0 / 3.0, 1e-12);
  const auto diag = confusion(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 2}, 3);
  EXPECT_EQ(macro_f1(diag), 1.0);
  EXPECT_TRUE(top_confusion_pairs(diag, 5).empty());
}

TEST(Metrics, ZeroSupportWarns) {
  std::vector<std::string> warnings;
  const auto cm = confusion(std::vector<int>{0, 1}, std::vector<int>{0, 1}, 3);
  EXPECT_NEAR(macro_f1(cm, &warnings), 2.0 / 3.0, 1e-12);
  ASSERT_EQ(warnings.size(), 1u);
}

TEST(Metrics, MatchesBruteForceOn1000Sets) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 9);
    const std::size_t n = 1 + rng() % 200;
    std::vector<int> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % k);
      p[i] = rng() % 3 == 0 ? y[i] : static_cast<int>(rng() % k);
    }
    const auto cm = confusion(y, p, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        std::int64_t c = 0;
        for (std::size_t t = 0; t < n; ++t) c += y[t] == i && p[t] == j;
        ASSERT_EQ(cm.at(i, j), c);
      }
    }
    const Oracle o = brute_force(y, p, k);
    ASSERT_EQ(accuracy(cm), o.accuracy) << trial;
    ASSERT_NEAR(macro_f1(cm), o.macro_f1, 1e-15) << trial;
  }
}

TEST(Metrics, PermutationInvariance) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 5;
    std::vector<int> y(80), p(80), perm = {3, 0, 4, 1, 2};
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = static_cast<int>(rng() % k);
      p[i] = static_cast<int>(rng() % k);
    }
    std::vector<int> yp(y.size()), pp(p.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      yp[i] = perm[y[i]];
      pp[i] = perm[p[i]];
    }
    const auto a = confusion(y, p, k), b = confusion(yp, pp, k);
    EXPECT_EQ(accuracy(a), accuracy(b));
    EXPECT_NEAR(macro_f1(a), macro_f1(b), 1e-12);
  }
}

TEST(Metrics, TopPairsRowNormalised) {
  // Row 0: 8 total, 2 to class 1. Row 1: 4 total, 2 to class 2. Row 2: 5, 1 to 0.
  ConfusionMatrix cm;
  cm.num_classes = 3;
  cm.counts = {6, 2, 0, 0, 2, 2, 1, 0, 4};
  const auto pairs = top_confusion_pairs(cm, 5);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].true_class, 1);
  EXPECT_EQ(pairs[0].predicted_class, 2);
  EXPECT_DOUBLE_EQ(pairs[0].rate, 0.5);
  EXPECT_EQ(pairs[1].true_class, 0);
  EXPECT_DOUBLE_EQ(pairs[1].rate, 0.25);
  EXPECT_DOUBLE_EQ(pairs[2].rate, 0.2);
  EXPECT_EQ(top_confusion_pairs(cm, 1).size(), 1u);
  for (const auto& pr : pairs) {
    EXPECT_NE(pr.true_class, pr.predicted_class);
    EXPECT_GE(pr.rate, 0.0);
    EXPECT_LE(pr.rate, 1.0);
  }
}

TEST(Metrics, TopPairsTiesInCanonicalOrder) {
  ConfusionMatrix cm;
  cm.num_classes = 3;
  cm.counts = {1, 0, 1, 1, 1, 0, 0, 1, 1};
  const auto pairs = top_confusion_pairs(cm, 5);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0].true_class, 0);
  EXPECT_EQ(pairs[1].true_class, 1);
  EXPECT_EQ(pairs[2].true_class, 2);
}

TEST(Metrics, ReportAndDumpRoundTrip) {
  testing::TempDir dir("metrics");
  std::vector<ScoredUtterance> rows;
  for (int i = 0; i < 6; ++i) {
    ScoredUtterance s;
    s.utterance_id = "u" + std::to_string(i);
    s.label = i % 3;
    s.predicted = (i + (i == 4)) % 3;
    s.max_probability = 0.5 + 0.05 * i;
    s.duration_s = 3.0 + i;
    s.probabilities = {0.2, 0.3, 0.5};
    rows.push_back(s);
  }
  const std::vector<std::string> names = {"a", "b", "c"};
  write_prediction_dump(dir / "p.jsonl", rows, names);
  const auto back = read_prediction_dump(dir / "p.jsonl");
  ASSERT_EQ(back.size(), rows.size());
  EXPECT_EQ(back[4].predicted, rows[4].predicted);
  EXPECT_DOUBLE_EQ(back[5].duration_s, 8.0);

  const EvalReport r = make_report(rows, names, "tibetan");
  EXPECT_EQ(r.n_utterances, 6);
  EXPECT_NEAR(r.accuracy, 5.0 / 6.0, 1e-12);
  const EvalReport r2 = report_from_json(to_json(r));
  EXPECT_EQ(r2.macro_f1, r.macro_f1);
  EXPECT_EQ(r2.confusion.counts, r.confusion.counts);
  EXPECT_EQ(r2.class_names, names);
  const std::string csv = confusion_csv(r.confusion, names);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "true\\predicted,a,b,c");
  EXPECT_THROW(make_report(std::vector<ScoredUtterance>{}, names, "x"), Error);
}

}  // namespace
}  // namespace voxlect
