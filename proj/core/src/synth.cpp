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

#include "voxlect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "voxlect/audio.hpp"

namespace voxlect {

namespace {

// RBJ band-pass biquad, constant 0 dB peak gain.
class BandPass {
 public:
  BandPass(double center_hz, double q, double sample_rate) {
    const double w0 = 2.0 * std::numbers::pi * center_hz / sample_rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0_ = alpha / a0;
    b2_ = -alpha / a0;
    a1_ = -2.0 * std::cos(w0) / a0;
    a2_ = (1.0 - alpha) / a0;
  }

  double operator()(double x) {
    const double y = b0_ * x + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double b0_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace

Waveform synth_utterance(int class_index, int num_classes, double duration_s,
                         double speaker_shift, Rng& rng) {
  if (class_index < 0 || class_index >= num_classes) {
    throw Error("synth: class index out of range");
  }
  constexpr double sr = kTargetSampleRate;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sr));
  // Classes are spread on a log-frequency grid between 250 Hz and 5 kHz.
  const double pos = num_classes > 1
                         ? static_cast<double>(class_index) / (num_classes - 1)
                         : 0.0;
  const double tone_hz = 250.0 * std::pow(16.0, pos) * speaker_shift;
  const double band_hz = tone_hz * 1.5;

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  const double rate_hz = 3.0 + 3.0 * unit(rng);

  BandPass f1(band_hz, 4.0, sr), f2(band_hz, 4.0, sr);
  std::vector<double> noise(n), tone(n);
  for (std::size_t i = 0; i < n; ++i) {
    noise[i] = f2(f1(gauss(rng)));
    const double t = static_cast<double>(i) / sr;
    const double envelope =
        0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * rate_hz * t + phase);
    tone[i] = envelope * std::sin(2.0 * std::numbers::pi * tone_hz * t + phase);
  }
  const double noise_rms = rms(noise);
  std::vector<double> content(n);
  for (std::size_t i = 0; i < n; ++i) {
    content[i] = 0.5 * tone[i] + 0.35 * noise[i] / noise_rms;
  }
  // Broadband background 5 to 20 dB below the class content.
  const double floor_rms =
      rms(content) * std::pow(10.0, -(5.0 + 15.0 * unit(rng)) / 20.0);
  const double gain = 0.3 + 0.4 * unit(rng);
  Waveform out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = content[i] + floor_rms * gauss(rng);
    out[i] = static_cast<float>(std::clamp(gain * v, -1.0, 1.0));
  }
  return out;
}

std::vector<ManifestRecord> synthesize_corpus(const std::filesystem::path& dir,
                                              const Taxonomy& taxonomy,
                                              const SynthOptions& o) {
  if (o.num_speakers < 1 || o.utterances_per_speaker < 1) {
    throw Error("synth: need at least one speaker and one utterance");
  }
  if (!(o.min_duration_s > 0.0) || o.max_duration_s < o.min_duration_s) {
    throw Error("synth: invalid duration range");
  }
  const auto& labels = taxonomy.canonical_labels(o.group);
  const int k = static_cast<int>(labels.size());
  std::filesystem::create_directories(dir / "wav");
  Rng rng = seeded_rng(o.seed, "synth");
  std::uniform_real_distribution<double> dur(o.min_duration_s, o.max_duration_s);
  std::uniform_real_distribution<double> shift(0.95, 1.05);

  // Per class, round(test_fraction * speakers) speakers go to test.
  std::vector<bool> is_test(static_cast<std::size_t>(o.num_speakers), false);
  for (int c = 0; c < k; ++c) {
    std::vector<int> members;
    for (int s = c; s < o.num_speakers; s += k) members.push_back(s);
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(o.test_fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < n_test && i < members.size(); ++i) {
      is_test[static_cast<std::size_t>(members[i])] = true;
    }
  }

  std::vector<ManifestRecord> records;
  char buf[64];
  for (int s = 0; s < o.num_speakers; ++s) {
    const int cls = s % k;
    const double speaker_shift = shift(rng);
    std::snprintf(buf, sizeof(buf), "spk%03d", s);
    const std::string speaker = buf;
    for (int u = 0; u < o.utterances_per_speaker; ++u) {
      // Durations are whole milliseconds so the manifest value is exact.
      const double d = std::round(dur(rng) * 1000.0) / 1000.0;
      const Waveform w = synth_utterance(cls, k, d, speaker_shift, rng);
      std::snprintf(buf, sizeof(buf), "%s_u%02d", speaker.c_str(), u);
      ManifestRecord r;
      r.utterance_id = buf;
      r.audio_path = dir / "wav" / (r.utterance_id + ".wav");
      write_wav(r.audio_path, w, kTargetSampleRate, WavEncoding::pcm16);
      r.duration_s = static_cast<double>(w.size()) / kTargetSampleRate;
      r.sample_rate_hz = kTargetSampleRate;
      r.speaker_id = speaker;
      r.raw_label = labels[cls].name;
      r.dataset_id = std::string(kCanonicalDataset);
      if (o.test_fraction > 0.0) {
        r.split = is_test[static_cast<std::size_t>(s)] ? Split::test : Split::train;
      }
      records.push_back(std::move(r));
    }
  }
  write_manifest(dir / "manifest.jsonl", records);
  return records;
}

}  // namespace voxlect
