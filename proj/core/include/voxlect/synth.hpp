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

#pragma once

// Synthetic dialect corpus: each class is a distinct tone plus band-limited
// noise, so a working pipeline separates them almost perfectly.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voxlect/common.hpp"
#include "voxlect/corpus.hpp"
#include "voxlect/taxonomy.hpp"

namespace voxlect {

struct SynthOptions {
  LanguageGroup group = LanguageGroup::thai;  // classes are its labels
  int num_speakers = 50;
  int utterances_per_speaker = 10;
  double min_duration_s = 3.0;
  double max_duration_s = 10.0;
  // Speaker-disjoint test fraction, applied per class; 0 leaves splits
  // unassigned.
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// One class-conditional waveform at 16 kHz.
Waveform synth_utterance(int class_index, int num_classes, double duration_s,
                         double speaker_shift, Rng& rng);

/// Writes <dir>/wav/*.wav and <dir>/manifest.jsonl (dataset "canonical",
/// raw labels equal to canonical names). Speakers cycle through the classes,
/// so every speaker has one class, and the test split is stratified by class.
/// Returns the records.
std::vector<ManifestRecord> synthesize_corpus(const std::filesystem::path& dir,
                                              const Taxonomy& taxonomy,
                                              const SynthOptions& options = {});

}  // namespace voxlect
