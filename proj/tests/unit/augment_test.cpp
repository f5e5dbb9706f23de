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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voxlect/augment.hpp"

namespace voxlect {
namespace {

double snr_db(const Waveform& clean, const Waveform& noisy) {
  double ps = 0.0, pn = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    ps += double(clean[i]) * clean[i];
    const double d = double(noisy[i]) - clean[i];
    pn += d * d;
  }
  return 10.0 * std::log10(ps / pn);
}

Waveform sine(std::size_t n, double freq, double amp = 0.5) {
  Waveform w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * freq *
                                              static_cast<double>(i) / 16000.0));
  }
  return w;
}

TEST(Augment, NoiseHitsRequestedSnr) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(3.0, 30.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Waveform x = testing::random_wave(4000, static_cast<std::uint64_t>(trial), 0.2f);
    const double target = u(rng);
    const Waveform y = add_gaussian_noise(x, target, rng);
    ASSERT_NEAR(snr_db(x, y), target, 0.2) << trial;
  }
}

TEST(Augment, NoiseRmsForUnitSignal) {
  Rng rng(1);
  Waveform x(16000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2) ? 1.0f : -1.0f;
  auto noise_rms = [&](double snr) {
    const Waveform y = add_gaussian_noise(x, snr, rng);
    double p = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) p += std::pow(double(y[i]) - x[i], 2);
    return std::sqrt(p / static_cast<double>(x.size()));
  };
  EXPECT_NEAR(noise_rms(20.0), 0.1, 1e-4);
  EXPECT_NEAR(noise_rms(3.0), std::pow(10.0, -3.0 / 20.0), 1e-4);
}

TEST(Augment, NoiseRejectsSilence) {
  Rng rng(1);
  EXPECT_THROW(add_gaussian_noise(Waveform(100, 0.0f), 10.0, rng), Error);
}

TEST(Augment, MaskIsContiguousWithExactCount) {
  const Waveform x(16000, 0.5f);
  for (double ratio : {0.10, 0.15}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const Waveform y = time_mask(x, ratio, rng);
      std::size_t zeros = 0, first = y.size(), last = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0f) {
          ++zeros;
          first = std::min(first, i);
          last = i;
        }
      }
      EXPECT_EQ(zeros, ratio == 0.10 ? 1600u : 2400u);
      EXPECT_EQ(last - first + 1, zeros);
    }
  }
}

TEST(Augment, StretchLengths) {
  const Waveform x = sine(16000, 440.0);
  EXPECT_NEAR(static_cast<double>(time_stretch(x, 1.1).size()), 14545.0, 1.0);
  EXPECT_NEAR(static_cast<double>(time_stretch(x, 0.9).size()), 17778.0, 1.0);
  EXPECT_EQ(time_stretch(x, 1.0), x);
  EXPECT_THROW(time_stretch(x, 3.0), Error);
}

// Tempo change by resampling moves a tone's frequency by the rate.
TEST(Augment, StretchScalesFrequency) {
  const Waveform x = sine(32000, 500.0);
  const Waveform y = time_stretch(x, 1.1);
  auto crossings = [](const Waveform& w, std::size_t from, std::size_t to) {
    int c = 0;
    for (std::size_t i = from + 1; i < to; ++i) {
      if ((w[i - 1] < 0.0f) != (w[i] < 0.0f)) ++c;
    }
    return c;
  };
  const double fx = crossings(x, 1000, 17000) / 2.0;
  const double fy = crossings(y, 1000, 17000) / 2.0;
  EXPECT_NEAR(fy / fx, 1.1, 0.01);
}

TEST(Augment, PolarityNegates) {
  const Waveform x = testing::random_wave(500, 2);
  const Waveform y = polarity_invert(x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], -x[i]);
}

TEST(Augment, DisabledPolicyIsIdentity) {
  const Waveform x = testing::random_wave(8000, 4);
  Rng rng(9);
  EXPECT_EQ(apply_policy(x, AugmentationPolicy::disabled(), rng), x);
}

TEST(Augment, PolicyDeterministicPerSeed) {
  const Waveform x = testing::random_wave(16000, 5);
  AugmentationPolicy p;
  Rng a(77), b(77), c(78);
  const Waveform ya = apply_policy(x, p, a);
  EXPECT_EQ(ya, apply_policy(x, p, b));
  EXPECT_NE(ya, apply_policy(x, p, c));
}

TEST(Augment, PolicyRetruncatesStretchedClips) {
  const Waveform x = testing::random_wave(240000, 6);
  AugmentationPolicy p = AugmentationPolicy::disabled();
  p.stretch_prob = 1.0;
  p.stretch_low = p.stretch_high = 0.9;
  Rng rng(1);
  EXPECT_EQ(apply_policy(x, p, rng).size(), 240000u);
}

TEST(Augment, PolicyValidation) {
  AugmentationPolicy p;
  p.noise_prob = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.snr_low_db = 40.0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.stretch_high = 2.5;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Augment, RefusedInsideEvaluationScope) {
  const Waveform x = testing::random_wave(1000, 7);
  Rng rng(1);
  {
    EvaluationScope scope;
    EXPECT_TRUE(EvaluationScope::active());
    EXPECT_THROW(apply_policy(x, AugmentationPolicy{}, rng), Error);
  }
  EXPECT_FALSE(EvaluationScope::active());
  EXPECT_NO_THROW(apply_policy(x, AugmentationPolicy{}, rng));
}

}  // namespace
}  // namespace voxlect
