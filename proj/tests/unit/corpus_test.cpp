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

#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voxlect/audio.hpp"
#include "voxlect/corpus.hpp"

namespace voxlect {
namespace {

using testing::TempDir;

ManifestRecord rec(std::string id, std::string spk, double dur,
                   std::string raw = "Amdo", std::string ds = "canonical") {
  ManifestRecord r;
  r.utterance_id = std::move(id);
  r.audio_path = r.utterance_id + ".wav";
  r.duration_s = dur;
  r.sample_rate_hz = 16000;
  r.speaker_id = std::move(spk);
  r.raw_label = std::move(raw);
  r.dataset_id = std::move(ds);
  return r;
}

TEST(Corpus, IngestBoundariesAndReasons) {
  const auto& t = Taxonomy::builtin();
  std::vector<ManifestRecord> in = {
      rec("a", "s1", 2.9, "Kham"), rec("b", "s1", 3.0, "Kham"),
      rec("c", "s2", 12.0, "Amdo")};
  const auto res = ingest(in, t, LanguageGroup::tibetan);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].utterance_id, "b");
  EXPECT_EQ(*res.records[0].label, "Kham");
  ASSERT_EQ(res.exclusions.size(), 1u);
  EXPECT_EQ(res.exclusions[0].reason, "below 3 s minimum");
}

TEST(Corpus, IngestExcludesBritish) {
  const auto& t = Taxonomy::builtin();
  std::vector<ManifestRecord> in = {rec("x", "s", 5.0, "British", "commonvoice-en")};
  const auto res = ingest(in, t, LanguageGroup::english);
  EXPECT_TRUE(res.records.empty());
  ASSERT_EQ(res.exclusions.size(), 1u);
  EXPECT_EQ(res.exclusions[0].reason, "excluded label");
}

TEST(Corpus, IngestUnmappedLabelThrows) {
  std::vector<ManifestRecord> in = {rec("x", "s", 5.0, "Martian", "commonvoice-en")};
  EXPECT_THROW(ingest(in, Taxonomy::builtin(), LanguageGroup::english), Error);
}

// Fuzzed manifests: a record is dropped iff its label maps to EXCLUDE or its
// duration is below 3 s.
TEST(Corpus, IngestFuzzMatchesPredicate) {
  const auto& t = Taxonomy::builtin();
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ManifestRecord> in;
    std::set<std::string> expect_kept;
    for (int i = 0; i < 60; ++i) {
      const auto datasets = t.dataset_ids(LanguageGroup::english);
      const auto& ds = datasets[rng() % datasets.size()];
      const auto& map = t.label_map(LanguageGroup::english, ds);
      auto it = map.entries.begin();
      std::advance(it, static_cast<long>(rng() % map.entries.size()));
      const double durations[] = {1.0, 2.999, 3.0, 3.001, 7.5, 15.0, 20.0};
      const double d = durations[rng() % 7];
      const std::string id = "t" + std::to_string(trial) + "_" + std::to_string(i);
      in.push_back(rec(id, "s" + std::to_string(rng() % 5), d, it->first, ds));
      if (it->second.has_value() && d >= 3.0) expect_kept.insert(id);
    }
    const auto res = ingest(in, t, LanguageGroup::english);
    std::set<std::string> kept;
    for (const auto& r : res.records) kept.insert(r.utterance_id);
    EXPECT_EQ(kept, expect_kept);
    EXPECT_EQ(res.records.size() + res.exclusions.size(), in.size());
    EXPECT_TRUE(std::is_sorted(res.exclusions.begin(), res.exclusions.end(),
                               [](const Exclusion& a, const Exclusion& b) {
                                 return a.utterance_id < b.utterance_id;
                               }));
  }
}

TEST(Corpus, ManifestRoundTrip) {
  TempDir dir("manifest");
  std::vector<ManifestRecord> in = {rec("a", "s1", 4.0), rec("b", "s2", 5.5, "Kham")};
  in[0].audio_path = dir / "wav" / "a.wav";
  in[1].split = Split::test;
  in[1].label = "Kham";
  write_manifest(dir / "m.jsonl", in);
  const auto out = read_manifest(dir / "m.jsonl");
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].audio_path, dir / "wav" / "a.wav");
  EXPECT_EQ(out[1].split, Split::test);
  EXPECT_EQ(*out[1].label, "Kham");
  EXPECT_FALSE(out[0].label.has_value());
  EXPECT_DOUBLE_EQ(out[1].duration_s, 5.5);
}

TEST(Corpus, ManifestRejectsDuplicatesAndBadValues) {
  TempDir dir("manifest");
  write_manifest(dir / "dup.jsonl", std::vector{rec("a", "s", 4.0), rec("a", "s", 4.0)});
  EXPECT_THROW(read_manifest(dir / "dup.jsonl"), Error);
  write_manifest(dir / "neg.jsonl", std::vector{rec("a", "s", -1.0)});
  EXPECT_THROW(read_manifest(dir / "neg.jsonl"), Error);
  EXPECT_THROW(read_manifest(dir / "missing.jsonl"), Error);
}

TEST(Corpus, PrepareStereo44kTruncates) {
  TempDir dir("prep");
  AudioBuffer b;
  b.sample_rate = 44100;
  b.channels = 2;
  b.samples.assign(static_cast<std::size_t>(20 * 44100 * 2), 0.25f);
  write_wav(dir / "long.wav", b);
  ManifestRecord r = rec("long", "s", 20.0, "Kham");
  r.audio_path = dir / "long.wav";
  const auto ex = prepare(r, Taxonomy::builtin(), LanguageGroup::tibetan);
  EXPECT_EQ(ex.waveform.size(), 240000u);
  EXPECT_DOUBLE_EQ(ex.duration_s, 15.0);
  EXPECT_EQ(ex.label, 1);
}

TEST(Corpus, PrepareIdentityAt16k) {
  TempDir dir("prep");
  const Waveform w = testing::random_wave(64000, 9);
  write_wav(dir / "a.wav", w, 16000);
  ManifestRecord r = rec("a", "s", 4.0);
  r.audio_path = dir / "a.wav";
  const auto ex = prepare(r, Taxonomy::builtin(), LanguageGroup::tibetan);
  EXPECT_EQ(ex.waveform, w);

  write_wav(dir / "b.wav", Waveform(240000, 0.1f), 16000);
  r.audio_path = dir / "b.wav";
  EXPECT_EQ(prepare(r, Taxonomy::builtin(), LanguageGroup::tibetan).waveform.size(),
            240000u);
}

TEST(Corpus, PrepareClipsAmplitude) {
  AudioBuffer b;
  b.sample_rate = 16000;
  b.channels = 1;
  b.samples = Waveform(48000, 1.7f);
  const Waveform out = prepare_audio(b);
  for (float v : out) EXPECT_LE(std::abs(v), 1.0f);
}

TEST(Corpus, PrepareNoTruncateKeepsLength) {
  AudioBuffer b;
  b.sample_rate = 16000;
  b.channels = 1;
  b.samples = Waveform(16000 * 20, 0.1f);
  PrepareOptions o;
  o.truncate = false;
  EXPECT_EQ(prepare_audio(b, o).size(), b.samples.size());
}

TEST(Corpus, PrepareDecodeErrorNamesUtterance) {
  ManifestRecord r = rec("ghost", "s", 4.0);
  r.audio_path = "/nonexistent/ghost.wav";
  try {
    prepare(r, Taxonomy::builtin(), LanguageGroup::tibetan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

std::vector<ManifestRecord> speakers(int n_speakers, int per_speaker) {
  std::vector<ManifestRecord> out;
  for (int s = 0; s < n_speakers; ++s) {
    for (int u = 0; u < per_speaker; ++u) {
      out.push_back(rec("s" + std::to_string(s) + "_" + std::to_string(u),
                        "spk" + std::to_string(s), 4.0));
    }
  }
  return out;
}

TEST(Corpus, SpeakerSplitTenSpeakers) {
  const auto out = speaker_split(speakers(10, 3), 0.2, 7);
  std::set<std::string> test, train;
  for (const auto& r : out) (r.split == Split::test ? test : train).insert(r.speaker_id);
  EXPECT_EQ(test.size(), 2u);
  EXPECT_EQ(train.size(), 8u);
  for (const auto& s : test) EXPECT_FALSE(train.count(s));
  const auto again = speaker_split(speakers(10, 3), 0.2, 7);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].split, again[i].split);
}

TEST(Corpus, SpeakerSplitFractionsOverSizes) {
  for (int n = 2; n <= 60; ++n) {
    const auto out = speaker_split(speakers(n, 2), 0.2, static_cast<std::uint64_t>(n));
    std::set<std::string> test, train;
    for (const auto& r : out) (r.split == Split::test ? test : train).insert(r.speaker_id);
    const auto expected = std::clamp<long long>(std::llround(0.2 * n), 1, n - 1);
    EXPECT_EQ(static_cast<long long>(test.size()), expected) << n;
    EXPECT_EQ(test.size() + train.size(), static_cast<std::size_t>(n));
  }
}

TEST(Corpus, SpeakerSplitErrors) {
  EXPECT_THROW(speaker_split(speakers(1, 4), 0.2, 0), Error);
  auto pre = speakers(4, 2);
  pre[0].split = Split::train;
  try {
    speaker_split(pre, 0.2, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("default split present"), std::string::npos);
  }
}

TEST(Corpus, AssignSplitsLeavesDefaultSplitsAlone) {
  auto a = speakers(5, 2);
  for (auto& r : a) {
    r.dataset_id = "with-default";
    r.split = Split::train;
  }
  auto b = speakers(10, 2);
  for (auto& r : b) r.utterance_id += "_b";
  a.insert(a.end(), b.begin(), b.end());
  const auto out = assign_splits(a, 0.2, 1);
  for (const auto& r : out) {
    if (r.dataset_id == "with-default") EXPECT_EQ(r.split, Split::train);
    else EXPECT_NE(r.split, Split::unassigned);
  }
}

TEST(Corpus, SubsampleCaps) {
  auto recs = speakers(1, 37);
  EXPECT_EQ(subsample_per_speaker(recs, 10, 3).size(), 10u);
  EXPECT_EQ(subsample_per_speaker(speakers(1, 4), 10, 3).size(), 4u);
  EXPECT_EQ(subsample_per_speaker(speakers(3, 5), 1, 3).size(), 3u);
  const auto a = subsample_per_speaker(recs, 10, 3);
  const auto b = subsample_per_speaker(recs, 10, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].utterance_id, b[i].utterance_id);
  EXPECT_EQ(default_subsample_policy().at("indicvoices"), 10);
}

TEST(Corpus, ClassDistribution) {
  auto recs = speakers(2, 2);
  recs[0].label = "Kham";
  recs[1].label = "Kham";
  recs[2].label = "Amdo";
  const auto d = class_distribution(recs, Taxonomy::builtin(), LanguageGroup::tibetan);
  EXPECT_EQ(d, (std::vector<int>{0, 2, 1}));
}

}  // namespace
}  // namespace voxlect
