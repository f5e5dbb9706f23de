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

// Training-time waveform augmentation: additive Gaussian noise at a target
// SNR, time masking, resampling-based time stretch and polarity inversion.

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "voxlect/audio.hpp"
#include "voxlect/common.hpp"

namespace voxlect {

struct AugmentationPolicy {
  double noise_prob = 1.0;
  double snr_low_db = 3.0;
  double snr_high_db = 30.0;
  double mask_prob = 1.0;
  double mask_ratio_low = 0.10;
  double mask_ratio_high = 0.15;
  int mask_spans = 1;
  double stretch_prob = 1.0;
  double stretch_low = 0.9;
  double stretch_high = 1.1;
  double polarity_prob = 0.5;
  std::uint64_t seed = 0;
  // Stretched clips longer than this are re-truncated (head kept).
  double max_duration_s = 15.0;

  /// All probabilities zero.
  static AugmentationPolicy disabled();

  /// Throws Error describing the first invalid field.
  void validate() const;
};

/// Adds i.i.d. Gaussian noise, rescaled so that the realized noise power
/// gives exactly `snr_db` against the full-clip signal power.
Waveform add_gaussian_noise(std::span<const float> x, double snr_db, Rng& rng);

/// Zeroes round(ratio * len) samples. With spans == 1 this is one contiguous
/// span at a uniformly drawn start; with more spans the total is split evenly
/// and spans may overlap.
Waveform time_mask(std::span<const float> x, double ratio, Rng& rng,
                   int spans = 1);

/// Tempo change by resampling (pitch shifts with tempo). Output length is
/// round(len / rate); rate must lie in [0.5, 2].
Waveform time_stretch(std::span<const float> x, double rate,
                      const ResampleQuality& quality = {});

Waveform polarity_invert(std::span<const float> x);

/// Noise, mask, stretch, polarity, in that order, each with its probability
/// and parameters drawn uniformly from the policy range.
Waveform apply_policy(std::span<const float> x, const AugmentationPolicy& p,
                      Rng& rng);

/// While an EvaluationScope is alive on a thread, apply_policy refuses to run
/// on that thread. Evaluation entry points open one.
class EvaluationScope {
 public:
  EvaluationScope();
  ~EvaluationScope();
  EvaluationScope(const EvaluationScope&) = delete;
  EvaluationScope& operator=(const EvaluationScope&) = delete;

  static bool active();

 private:
  bool previous_;
};

}  // namespace voxlect
