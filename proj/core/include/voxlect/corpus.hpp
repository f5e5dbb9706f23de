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

// Manifest ingestion, duration/label filtering, speaker-disjoint splits and
// per-speaker subsampling.
//
// Manifest format: UTF-8 JSON Lines, one object per utterance:
//
//   {"utterance_id": "u0001", "audio_path": "wav/u0001.wav",
//    "duration_s": 4.2, "sample_rate_hz": 16000, "speaker_id": "spk07",
//    "raw_label": "Kham", "dataset_id": "tibmd", "split": "train"}
//
// "split" is optional ("train" | "test" | "unassigned", default
// "unassigned"). Ingested manifests additionally carry "label", the canonical
// class name. Relative audio paths resolve against the manifest's directory.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxlect/audio.hpp"
#include "voxlect/common.hpp"
#include "voxlect/taxonomy.hpp"

namespace voxlect {

enum class Split { train, test, unassigned };

std::string_view split_name(Split s);
Split parse_split(std::string_view s);

struct ManifestRecord {
  std::string utterance_id;
  std::filesystem::path audio_path;
  double duration_s = 0.0;
  int sample_rate_hz = 0;
  std::string speaker_id;
  std::string raw_label;
  std::string dataset_id;
  Split split = Split::unassigned;
  std::optional<std::string> label;  // canonical name, set by ingest

  /// Speakers are scoped by dataset; the same id in two corpora is two people.
  std::string speaker_key() const { return dataset_id + "/" + speaker_id; }
};

struct Exclusion {
  std::string utterance_id;
  std::string dataset_id;
  std::string reason;
};

struct IngestResult {
  std::vector<ManifestRecord> records;
  std::vector<Exclusion> exclusions;  // ordered by utterance_id
};

inline constexpr double kMinDurationS = 3.0;
inline constexpr double kMaxDurationS = 15.0;

/// Throws on unreadable files, malformed lines, duplicate utterance ids or
/// non-positive duration / sample rate.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// Audio paths are written relative to the manifest's directory when
/// possible.
void write_manifest(const std::filesystem::path& path,
                    std::span<const ManifestRecord> records);

void write_exclusions(const std::filesystem::path& path,
                      std::span<const Exclusion> exclusions);

/// Drops EXCLUDED labels and clips shorter than 3 s; resolves canonical labels
/// for the rest. Unmapped raw labels and unregistered datasets throw.
IngestResult ingest(std::span<const ManifestRecord> records,
                    const Taxonomy& taxonomy, LanguageGroup group);
IngestResult ingest(const std::filesystem::path& manifest_path,
                    const Taxonomy& taxonomy, LanguageGroup group);

struct PrepareOptions {
  bool truncate = true;
  double max_duration_s = kMaxDurationS;
  ResampleQuality quality;
};

struct PreparedExample {
  std::string utterance_id;
  Waveform waveform;  // mono, 16 kHz, clipped to [-1, 1]
  int label = -1;
  double duration_s = 0.0;
};

/// Downmix, resample to 16 kHz, truncate to the first max_duration_s, clip.
Waveform prepare_audio(const AudioBuffer& audio,
                       const PrepareOptions& options = {});

/// Decodes and prepares one retained record. Decode failures throw an Error
/// that names the utterance.
PreparedExample prepare(const ManifestRecord& record, const Taxonomy& taxonomy,
                        LanguageGroup group,
                        const PrepareOptions& options = {});

/// Randomly assigns round(test_fraction * #speakers) speakers to test, the
/// rest to train. Refuses records that already carry a split.
std::vector<ManifestRecord> speaker_split(std::vector<ManifestRecord> records,
                                          double test_fraction,
                                          std::uint64_t seed);

/// speaker_split per dataset, leaving datasets with a default split alone.
std::vector<ManifestRecord> assign_splits(std::vector<ManifestRecord> records,
                                          double test_fraction,
                                          std::uint64_t seed);

/// Keeps at most max_per_speaker records per speaker, chosen at random but
/// deterministically for a seed; output preserves input order.
std::vector<ManifestRecord> subsample_per_speaker(
    std::vector<ManifestRecord> records, int max_per_speaker,
    std::uint64_t seed);

/// Datasets that get per-speaker subsampling by default, with their caps.
const std::map<std::string, int, std::less<>>& default_subsample_policy();

/// Per-class utterance counts in canonical order.
std::vector<int> class_distribution(std::span<const ManifestRecord> records,
                                    const Taxonomy& taxonomy,
                                    LanguageGroup group);

}  // namespace voxlect
