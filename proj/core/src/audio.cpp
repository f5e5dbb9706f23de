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

#include "voxlect/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <numeric>

namespace voxlect {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

float decode_sample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    if (bits == 32) return read_le<float>(p);
    if (bits == 64) return static_cast<float>(read_le<double>(p));
  } else {
    switch (bits) {
      case 8:
        return (static_cast<int>(p[0]) - 128) / 128.0f;
      case 16:
        return read_le<std::int16_t>(p) / 32768.0f;
      case 24: {
        std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
        if (v & 0x800000) v |= ~0xFFFFFF;
        return static_cast<float>(v / 8388608.0);
      }
      case 32:
        return static_cast<float>(read_le<std::int32_t>(p) / 2147483648.0);
    }
  }
  throw Error("unsupported WAV sample format (format " +
              std::to_string(format) + ", " + std::to_string(bits) + " bits)");
}

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

// Windowed-sinc lookup table over u in [0, zero_crossings].
struct SincTable {
  ResampleQuality q;
  std::vector<double> g;

  explicit SincTable(const ResampleQuality& quality) : q(quality) {
    const int n = q.zero_crossings * q.oversample;
    g.resize(static_cast<std::size_t>(n) + 2, 0.0);
    const double i0b = std::cyl_bessel_i(0.0, q.kaiser_beta);
    for (int i = 0; i <= n; ++i) {
      const double u = static_cast<double>(i) / q.oversample;
      const double r = u / q.zero_crossings;
      const double w =
          std::cyl_bessel_i(0.0, q.kaiser_beta * std::sqrt(std::max(0.0, 1 - r * r))) / i0b;
      const double s =
          i == 0 ? 1.0
                 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      g[static_cast<std::size_t>(i)] = s * w;
    }
  }

  double operator()(double u) const {
    const double x = u * q.oversample;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= g.size()) return 0.0;
    const double f = x - static_cast<double>(i);
    return g[i] + f * (g[i + 1] - g[i]);
  }
};

const SincTable& table_for(const ResampleQuality& q) {
  static std::mutex mu;
  static std::vector<std::unique_ptr<SincTable>> cache;
  std::lock_guard lock(mu);
  for (const auto& t : cache) {
    if (t->q.zero_crossings == q.zero_crossings &&
        t->q.oversample == q.oversample && t->q.kaiser_beta == q.kaiser_beta) {
      return *t;
    }
  }
  if (q.zero_crossings < 1 || q.oversample < 1) {
    throw Error("invalid resampler quality settings");
  }
  cache.push_back(std::make_unique<SincTable>(q));
  return *cache.back();
}

// Evaluates the band-limited signal at input position base + frac.
double interpolate_at(std::span<const float> in, const SincTable& table,
                      std::int64_t base, double frac, double fc,
                      double half_width) {
  const auto len = static_cast<std::int64_t>(in.size());
  const double t = static_cast<double>(base) + frac;
  const auto lo = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::ceil(t - half_width)));
  const auto hi = std::min<std::int64_t>(
      len - 1, static_cast<std::int64_t>(std::floor(t + half_width)));
  double acc = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double d = std::abs((static_cast<double>(base - k) + frac) * fc);
    acc += in[static_cast<std::size_t>(k)] * table(d);
  }
  return fc * acc;
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw Error("not a RIFF/WAVE file: " + path.string());
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t off = 12;
  while (off + 8 <= n) {
    const std::uint32_t size = read_le<std::uint32_t>(p + off + 4);
    const unsigned char* body = p + off + 8;
    const std::size_t avail = n - off - 8;
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw Error("truncated fmt chunk: " + path.string());
      format = read_le<std::uint16_t>(body);
      channels = read_le<std::uint16_t>(body + 2);
      rate = read_le<std::uint32_t>(body + 4);
      bits = read_le<std::uint16_t>(body + 14);
      if (format == kFormatExtensible && size >= 26 && avail >= 26) {
        format = read_le<std::uint16_t>(body + 24);
      }
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data = body;
      data_size = std::min<std::size_t>(size, avail);
    }
    off += 8 + size + (size & 1u);
  }
  if (channels == 0 || rate == 0 || bits == 0) {
    throw Error("missing or invalid fmt chunk: " + path.string());
  }
  if (data == nullptr) throw Error("missing data chunk: " + path.string());
  if (format != kFormatPcm && format != kFormatFloat) {
    throw Error("unsupported WAV format tag " + std::to_string(format) + ": " +
                path.string());
  }
  const std::size_t width = bits / 8u;
  const std::size_t count = data_size / width;
  AudioBuffer audio;
  audio.sample_rate = static_cast<int>(rate);
  audio.channels = channels;
  audio.samples.resize(count - count % channels);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    audio.samples[i] = decode_sample(data + i * width, format, bits);
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding) {
  const bool is_float = encoding == WavEncoding::float32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint16_t block =
      static_cast<std::uint16_t>(audio.channels * bits / 8);
  const auto data_size =
      static_cast<std::uint32_t>(audio.samples.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_le<std::uint32_t>(out, 36 + data_size);
  out += "WAVEfmt ";
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, is_float ? kFormatFloat : kFormatPcm);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(audio.channels));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_le<std::uint32_t>(out,
                        static_cast<std::uint32_t>(audio.sample_rate) * block);
  put_le<std::uint16_t>(out, block);
  put_le<std::uint16_t>(out, bits);
  out += "data";
  put_le<std::uint32_t>(out, data_size);
  for (float s : audio.samples) {
    if (is_float) {
      put_le<float>(out, s);
    } else {
      const float c = std::clamp(s, -1.0f, 1.0f);
      const long q = std::clamp(std::lround(c * 32768.0f), -32768L, 32767L);
      put_le<std::int16_t>(out, static_cast<std::int16_t>(q));
    }
  }
  write_file_atomic(path, out);
}

void write_wav(const std::filesystem::path& path, std::span<const float> mono,
               int sample_rate, WavEncoding encoding) {
  AudioBuffer a;
  a.sample_rate = sample_rate;
  a.channels = 1;
  a.samples.assign(mono.begin(), mono.end());
  write_wav(path, a, encoding);
}

Waveform downmix(const AudioBuffer& audio) {
  const std::size_t frames = audio.frames();
  const auto ch = static_cast<std::size_t>(audio.channels);
  if (ch == 1) return audio.samples;
  Waveform out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < ch; ++c) acc += audio.samples[i * ch + c];
    out[i] = static_cast<float>(acc / static_cast<double>(ch));
  }
  return out;
}

Waveform resample(std::span<const float> in, int sr_in, int sr_out,
                  const ResampleQuality& q) {
  if (sr_in <= 0 || sr_out <= 0) throw Error("sample rates must be positive");
  if (sr_in == sr_out) return Waveform(in.begin(), in.end());
  const std::int64_t g = std::gcd(sr_in, sr_out);
  const std::int64_t up = sr_out / g;
  const std::int64_t down = sr_in / g;
  const auto n_in = static_cast<std::int64_t>(in.size());
  const std::int64_t n_out = (n_in * up + down / 2) / down;
  const SincTable& table = table_for(q);
  const double fc =
      q.rolloff * std::min(1.0, static_cast<double>(sr_out) / sr_in);
  const double half_width = q.zero_crossings / fc;
  Waveform out(static_cast<std::size_t>(n_out));
  for (std::int64_t n = 0; n < n_out; ++n) {
    // Exact rational position: phase index is (n * down) mod up.
    const std::int64_t num = n * down;
    const std::int64_t base = num / up;
    const double frac = static_cast<double>(num % up) / static_cast<double>(up);
    out[static_cast<std::size_t>(n)] = static_cast<float>(
        interpolate_at(in, table, base, frac, fc, half_width));
  }
  return out;
}

Waveform resample_by_step(std::span<const float> in, std::size_t out_len,
                          double step, const ResampleQuality& q) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error("resample step must be positive and finite");
  }
  const SincTable& table = table_for(q);
  const double fc = q.rolloff * std::min(1.0, 1.0 / step);
  const double half_width = q.zero_crossings / fc;
  Waveform out(out_len);
  for (std::size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) * step;
    const double base = std::floor(t);
    out[n] = static_cast<float>(interpolate_at(
        in, table, static_cast<std::int64_t>(base), t - base, fc, half_width));
  }
  return out;
}

double mean_power(std::span<const float> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (float v : x) acc += static_cast<double>(v) * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace voxlect
