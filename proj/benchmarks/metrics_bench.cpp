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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "voxlect/apps.hpp"
#include "voxlect/metrics.hpp"
#include "voxlect/robustness.hpp"

namespace {

using namespace voxlect;

void BM_ConfusionAndMacroF1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int k = 16;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> cls(0, k - 1);
  std::vector<int> labels(n), preds(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = cls(rng);
    preds[i] = cls(rng);
  }
  for (auto _ : state) {
    const ConfusionMatrix cm = confusion(labels, preds, k);
    benchmark::DoNotOptimize(macro_f1(cm));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ConfusionAndMacroF1)->Arg(1000)->Arg(100000);

void BM_WordErrorRate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> word(0, 50);
  std::string ref, hyp;
  for (int i = 0; i < state.range(0); ++i) {
    ref += "w" + std::to_string(word(rng)) + " ";
    hyp += "w" + std::to_string(word(rng)) + " ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(wer(ref, hyp));
}
BENCHMARK(BM_WordErrorRate)->Arg(20)->Arg(200);

void BM_PairedBootstrap(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cls(0, 3);
  ConditionDump a{"clean", {}}, b{"clean", {}};
  for (int i = 0; i < 500; ++i) {
    ScoredUtterance u;
    u.utterance_id = "u" + std::to_string(i);
    u.label = cls(rng);
    u.predicted = cls(rng);
    a.rows.push_back(u);
    u.predicted = cls(rng);
    b.rows.push_back(u);
  }
  BootstrapOptions o;
  o.resamples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(compare_models(std::span(&a, 1), std::span(&b, 1), 4, o));
  }
}
BENCHMARK(BM_PairedBootstrap)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
