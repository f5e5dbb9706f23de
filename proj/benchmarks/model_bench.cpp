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

#include <benchmark/benchmark.h>

#include "voxlect/model.hpp"
#include "voxlect/synth.hpp"

namespace {

using namespace voxlect;

DialectClassifier make_model() {
  return DialectClassifier(Taxonomy::builtin(), LanguageGroup::thai,
                           mock_backbone({}), LoraOptions{}, ProbeConfig{});
}

Waveform utterance(double seconds) {
  Rng rng(5);
  return synth_utterance(1, 4, seconds, 1.0, rng);
}

void BM_BackboneForward(benchmark::State& state) {
  const auto backbone = mock_backbone({});
  const Waveform w = utterance(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(backbone->forward(w));
}
BENCHMARK(BM_BackboneForward)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_PredictProba(benchmark::State& state) {
  const DialectClassifier model = make_model();
  const Waveform w = utterance(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_proba(w));
}
BENCHMARK(BM_PredictProba)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_LossAndGradients(benchmark::State& state) {
  const DialectClassifier model = make_model();
  const Waveform w = utterance(static_cast<double>(state.range(0)));
  std::vector<Matrix> grads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.loss_and_gradients(w, 2, grads));
  }
}
BENCHMARK(BM_LossAndGradients)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
