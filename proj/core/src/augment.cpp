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

#include "voxlect/augment.hpp"

#include <algorithm>
#include <cmath>

namespace voxlect {

namespace {

thread_local bool g_evaluation_scope = false;

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(std::string("augmentation policy: ") + name +
                " must lie in [0, 1]");
  }
}

void check_range(double lo, double hi, const char* name) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw Error(std::string("augmentation policy: ") + name +
                " range must be finite with low <= high");
  }
}

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) {
  // Always draw so the stream position does not depend on p.
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return u < p;
}

}  // namespace

AugmentationPolicy AugmentationPolicy::disabled() {
  AugmentationPolicy p;
  p.noise_prob = 0.0;
  p.mask_prob = 0.0;
  p.stretch_prob = 0.0;
  p.polarity_prob = 0.0;
  return p;
}

void AugmentationPolicy::validate() const {
  check_prob(noise_prob, "noise_prob");
  check_prob(mask_prob, "mask_prob");
  check_prob(stretch_prob, "stretch_prob");
  check_prob(polarity_prob, "polarity_prob");
  check_range(snr_low_db, snr_high_db, "snr");
  check_range(mask_ratio_low, mask_ratio_high, "mask ratio");
  check_range(stretch_low, stretch_high, "stretch");
  if (!(mask_ratio_low > 0.0 && mask_ratio_high < 1.0)) {
    throw Error("augmentation policy: mask ratio must lie in (0, 1)");
  }
  if (!(stretch_low >= 0.5 && stretch_high <= 2.0)) {
    throw Error("augmentation policy: stretch rate must lie in [0.5, 2]");
  }
  if (mask_spans < 1) throw Error("augmentation policy: mask_spans must be >= 1");
  if (!(max_duration_s > 0.0)) {
    throw Error("augmentation policy: max_duration_s must be positive");
  }
}

Waveform add_gaussian_noise(std::span<const float> x, double snr_db,
                            Rng& rng) {
  if (!std::isfinite(snr_db)) throw Error("SNR must be finite");
  const double signal_power = mean_power(x);
  if (!(signal_power > 0.0)) {
    throw Error("SNR undefined for zero-power signal");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> noise(x.size());
  double noise_power = 0.0;
  for (auto& n : noise) {
    n = normal(rng);
    noise_power += n * n;
  }
  noise_power /= static_cast<double>(noise.size());
  const double target = signal_power / std::pow(10.0, snr_db / 10.0);
  const double scale =
      noise_power > 0.0 ? std::sqrt(target / noise_power) : 0.0;
  Waveform out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<float>(x[i] + scale * noise[i]);
  }
  return out;
}

Waveform time_mask(std::span<const float> x, double ratio, Rng& rng,
                   int spans) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error("mask ratio must lie in (0, 1)");
  }
  if (spans < 1) throw Error("mask spans must be >= 1");
  Waveform out(x.begin(), x.end());
  const auto len = x.size();
  const auto total =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(len)));
  for (int s = 0; s < spans; ++s) {
    // Spread the remainder over the first spans so the sizes sum to total.
    const std::size_t width = total / static_cast<std::size_t>(spans) +
                              (static_cast<std::size_t>(s) <
                                       total % static_cast<std::size_t>(spans)
                                   ? 1
                                   : 0);
    if (width == 0) continue;
    const std::size_t start = std::uniform_int_distribution<std::size_t>(
        0, len - width)(rng);
    std::fill(out.begin() + static_cast<long>(start),
              out.begin() + static_cast<long>(start + width), 0.0f);
  }
  return out;
}

Waveform time_stretch(std::span<const float> x, double rate,
                      const ResampleQuality& quality) {
  if (!(rate >= 0.5 && rate <= 2.0)) {
    throw Error("stretch rate must lie in [0.5, 2]");
  }
  if (rate == 1.0) return Waveform(x.begin(), x.end());
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) / rate));
  return resample_by_step(x, out_len, rate, quality);
}

Waveform polarity_invert(std::span<const float> x) {
  Waveform out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](float v) { return -v; });
  return out;
}

Waveform apply_policy(std::span<const float> x, const AugmentationPolicy& p,
                      Rng& rng) {
  if (EvaluationScope::active()) {
    throw Error("augmentation invoked inside an evaluation scope");
  }
  p.validate();
  Waveform w(x.begin(), x.end());
  if (coin(rng, p.noise_prob)) {
    const double snr = uniform(rng, p.snr_low_db, p.snr_high_db);
    // Silent clips have no defined SNR; leave them untouched.
    if (mean_power(w) > 0.0) w = add_gaussian_noise(w, snr, rng);
  }
  if (coin(rng, p.mask_prob) && !w.empty()) {
    w = time_mask(w, uniform(rng, p.mask_ratio_low, p.mask_ratio_high), rng,
                  p.mask_spans);
  }
  if (coin(rng, p.stretch_prob)) {
    w = time_stretch(w, uniform(rng, p.stretch_low, p.stretch_high));
    const auto cap = static_cast<std::size_t>(
        std::llround(p.max_duration_s * kTargetSampleRate));
    if (w.size() > cap) w.resize(cap);
  }
  if (coin(rng, p.polarity_prob)) w = polarity_invert(w);
  return w;
}

EvaluationScope::EvaluationScope() : previous_(g_evaluation_scope) {
  g_evaluation_scope = true;
}

EvaluationScope::~EvaluationScope() { g_evaluation_scope = previous_; }

bool EvaluationScope::active() { return g_evaluation_scope; }

}  // namespace voxlect
