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

#include "voxlect/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace voxlect {

namespace {

using nlohmann::json;

void check_records(std::span<const ManifestRecord> records) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (r.utterance_id.empty()) throw Error("record with empty utterance_id");
    if (!seen.insert(r.utterance_id).second) {
      throw Error("duplicate utterance_id: " + r.utterance_id);
    }
    if (!(r.duration_s > 0.0) || !std::isfinite(r.duration_s)) {
      throw Error("utterance " + r.utterance_id +
                  ": duration_s must be positive");
    }
    if (r.sample_rate_hz <= 0) {
      throw Error("utterance " + r.utterance_id +
                  ": sample_rate_hz must be positive");
    }
  }
}

ManifestRecord parse_record(const json& j, const std::filesystem::path& base) {
  ManifestRecord r;
  r.utterance_id = j.at("utterance_id").get<std::string>();
  r.audio_path = resolve_path(base, j.at("audio_path").get<std::string>())
                     .lexically_normal();
  r.duration_s = j.at("duration_s").get<double>();
  r.sample_rate_hz = j.at("sample_rate_hz").get<int>();
  r.speaker_id = j.at("speaker_id").get<std::string>();
  r.raw_label = j.at("raw_label").get<std::string>();
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.split = parse_split(j.value("split", std::string("unassigned")));
  if (j.contains("label") && !j.at("label").is_null()) {
    r.label = j.at("label").get<std::string>();
  }
  return r;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::test:
      return "test";
    case Split::unassigned:
      return "unassigned";
  }
  return "unassigned";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "unassigned" || s.empty()) return Split::unassigned;
  throw Error("unknown split '" + std::string(s) + "'");
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(parse_record(json::parse(line), base));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": malformed manifest record: " + e.what());
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  check_records(records);
  return records;
}

void write_manifest(const std::filesystem::path& path,
                    std::span<const ManifestRecord> records) {
  const auto base = std::filesystem::absolute(path).parent_path();
  std::string out;
  for (const auto& r : records) {
    auto audio = std::filesystem::absolute(r.audio_path).lexically_normal();
    auto rel = audio.lexically_relative(base);
    json j = {{"utterance_id", r.utterance_id},
              {"audio_path", rel.empty() ? audio.string() : rel.string()},
              {"duration_s", r.duration_s},
              {"sample_rate_hz", r.sample_rate_hz},
              {"speaker_id", r.speaker_id},
              {"raw_label", r.raw_label},
              {"dataset_id", r.dataset_id},
              {"split", split_name(r.split)}};
    if (r.label) j["label"] = *r.label;
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_exclusions(const std::filesystem::path& path,
                      std::span<const Exclusion> exclusions) {
  std::string out;
  for (const auto& e : exclusions) {
    out += json{{"utterance_id", e.utterance_id},
                {"dataset_id", e.dataset_id},
                {"reason", e.reason}}
               .dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

IngestResult ingest(std::span<const ManifestRecord> records,
                    const Taxonomy& taxonomy, LanguageGroup group) {
  check_records(records);
  IngestResult result;
  for (const auto& r : records) {
    const LabelMap& map = taxonomy.label_map(group, r.dataset_id);
    const auto mapped = taxonomy.map_raw_label(map, r.raw_label);
    if (!mapped) {
      result.exclusions.push_back(
          {r.utterance_id, r.dataset_id, "excluded label"});
      continue;
    }
    if (r.duration_s < kMinDurationS) {
      result.exclusions.push_back(
          {r.utterance_id, r.dataset_id, "below 3 s minimum"});
      continue;
    }
    ManifestRecord kept = r;
    kept.label = mapped->name;
    result.records.push_back(std::move(kept));
  }
  std::sort(result.exclusions.begin(), result.exclusions.end(),
            [](const Exclusion& a, const Exclusion& b) {
              return a.utterance_id < b.utterance_id;
            });
  return result;
}

IngestResult ingest(const std::filesystem::path& manifest_path,
                    const Taxonomy& taxonomy, LanguageGroup group) {
  const auto records = read_manifest(manifest_path);
  return ingest(records, taxonomy, group);
}

Waveform prepare_audio(const AudioBuffer& audio,
                       const PrepareOptions& options) {
  Waveform mono = downmix(audio);
  if (options.truncate && audio.sample_rate > 0) {
    // Trim before resampling to save work; keep one filter span of context
    // so the head of the clip is identical to a full-length resample.
    const auto keep = static_cast<std::size_t>(
        std::ceil(options.max_duration_s * audio.sample_rate)) +
        static_cast<std::size_t>(audio.sample_rate / 100 + 64);
    if (mono.size() > keep) mono.resize(keep);
  }
  Waveform out = resample(mono, audio.sample_rate, kTargetSampleRate,
                          options.quality);
  if (options.truncate) {
    const auto cap = static_cast<std::size_t>(
        std::llround(options.max_duration_s * kTargetSampleRate));
    if (out.size() > cap) out.resize(cap);
  }
  for (auto& s : out) s = std::clamp(s, -1.0f, 1.0f);
  return out;
}

PreparedExample prepare(const ManifestRecord& record, const Taxonomy& taxonomy,
                        LanguageGroup group, const PrepareOptions& options) {
  PreparedExample ex;
  ex.utterance_id = record.utterance_id;
  const std::string name =
      record.label ? *record.label
                   : [&] {
                       const auto m = taxonomy.map_raw_label(
                           taxonomy.label_map(group, record.dataset_id),
                           record.raw_label);
                       if (!m) {
                         throw Error("utterance " + record.utterance_id +
                                     " has an excluded label");
                       }
                       return m->name;
                     }();
  ex.label = taxonomy.label(group, name).index;
  AudioBuffer audio;
  try {
    audio = read_wav(record.audio_path);
  } catch (const Error& e) {
    throw Error("cannot decode utterance " + record.utterance_id + ": " +
                e.what());
  }
  ex.waveform = prepare_audio(audio, options);
  ex.duration_s =
      static_cast<double>(ex.waveform.size()) / kTargetSampleRate;
  return ex;
}

std::vector<ManifestRecord> speaker_split(std::vector<ManifestRecord> records,
                                          double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("test fraction must lie in (0, 1)");
  }
  for (const auto& r : records) {
    if (r.split != Split::unassigned) {
      throw Error("default split present in dataset '" + r.dataset_id +
                  "'; refusing to re-split");
    }
  }
  std::set<std::string> speaker_set;
  for (const auto& r : records) speaker_set.insert(r.speaker_key());
  std::vector<std::string> speakers(speaker_set.begin(), speaker_set.end());
  if (speakers.size() < 2) {
    throw Error("cannot split: need at least 2 speakers, found " +
                std::to_string(speakers.size()));
  }
  auto rng = seeded_rng(seed, "speaker_split");
  std::shuffle(speakers.begin(), speakers.end(), rng);
  auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(speakers.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, speakers.size() - 1);
  const std::set<std::string> test(speakers.begin(),
                                   speakers.begin() + static_cast<long>(n_test));
  for (auto& r : records) {
    r.split = test.count(r.speaker_key()) ? Split::test : Split::train;
  }
  return records;
}

std::vector<ManifestRecord> assign_splits(std::vector<ManifestRecord> records,
                                          double test_fraction,
                                          std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_dataset;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_dataset[records[i].dataset_id].push_back(i);
  }
  for (const auto& [ds, idx] : by_dataset) {
    const auto assigned =
        std::count_if(idx.begin(), idx.end(), [&](std::size_t i) {
          return records[i].split != Split::unassigned;
        });
    if (assigned == static_cast<long>(idx.size())) continue;
    if (assigned > 0) {
      throw Error("dataset '" + ds +
                  "' mixes assigned and unassigned splits");
    }
    std::vector<ManifestRecord> subset;
    subset.reserve(idx.size());
    for (auto i : idx) subset.push_back(records[i]);
    Fnv1a h;
    h.update(ds);
    subset = speaker_split(std::move(subset), test_fraction, seed ^ h.digest());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      records[idx[k]].split = subset[k].split;
    }
  }
  return records;
}

std::vector<ManifestRecord> subsample_per_speaker(
    std::vector<ManifestRecord> records, int max_per_speaker,
    std::uint64_t seed) {
  if (max_per_speaker < 1) throw Error("max_per_speaker must be >= 1");
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_speaker[records[i].speaker_key()].push_back(i);
  }
  std::vector<char> keep(records.size(), 1);
  for (auto& [spk, idx] : by_speaker) {
    if (idx.size() <= static_cast<std::size_t>(max_per_speaker)) continue;
    auto rng = seeded_rng(seed, spk);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = static_cast<std::size_t>(max_per_speaker);
         k < idx.size(); ++k) {
      keep[idx[k]] = 0;
    }
  }
  std::vector<ManifestRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(std::move(records[i]));
  }
  return out;
}

const std::map<std::string, int, std::less<>>& default_subsample_policy() {
  static const std::map<std::string, int, std::less<>> policy = {
      {"indicvoices", 10}};
  return policy;
}

std::vector<int> class_distribution(std::span<const ManifestRecord> records,
                                    const Taxonomy& taxonomy,
                                    LanguageGroup group) {
  std::vector<int> counts(static_cast<std::size_t>(taxonomy.num_classes(group)),
                          0);
  for (const auto& r : records) {
    if (!r.label) continue;
    ++counts[static_cast<std::size_t>(taxonomy.label(group, *r.label).index)];
  }
  return counts;
}

}  // namespace voxlect
