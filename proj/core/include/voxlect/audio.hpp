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

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "voxlect/common.hpp"

namespace voxlect {

/// Decoded audio, interleaved samples in [-1, 1].
struct AudioBuffer {
  int sample_rate = 0;
  int channels = 1;
  std::vector<float> samples;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels)
                        : 0;
  }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
  }
};

enum class WavEncoding { pcm16, float32 };

/// Reads RIFF/WAVE with PCM 8/16/24/32-bit or IEEE float 32/64 payloads,
/// including WAVE_FORMAT_EXTENSIBLE headers.
AudioBuffer read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::float32);
void write_wav(const std::filesystem::path& path, std::span<const float> mono,
               int sample_rate, WavEncoding encoding = WavEncoding::float32);

/// Channel average.
Waveform downmix(const AudioBuffer& audio);

/// Windowed-sinc interpolation settings. The kernel is a Kaiser-windowed sinc
/// with `zero_crossings` lobes per side, tabulated at `oversample` points per
/// lobe and linearly interpolated between table entries (polyphase with a
/// dense phase grid). `rolloff` scales the cutoff below the lower Nyquist.
struct ResampleQuality {
  int zero_crossings = 16;
  int oversample = 512;
  double kaiser_beta = 8.0;
  double rolloff = 0.95;
};

/// Rational-rate resampling. Output length is round(n * sr_out / sr_in).
/// Identical rates return a copy.
Waveform resample(std::span<const float> in, int sr_in, int sr_out,
                  const ResampleQuality& q = {});

/// Reads `out_len` samples from `in` at positions n * step (step > 0), with
/// anti-alias cutoff min(1, 1/step). Used for tempo change.
Waveform resample_by_step(std::span<const float> in, std::size_t out_len,
                          double step, const ResampleQuality& q = {});

double mean_power(std::span<const float> x);

}  // namespace voxlect
