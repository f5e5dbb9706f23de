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

#include "voxlect/taxonomy.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace voxlect {

// Defined in the generated taxonomy_data.cpp.
std::vector<std::string> builtin_taxonomy_documents();

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kAllGroups.size()> kGroupIds = {
    "english", "arabic",  "mandarin_cantonese", "tibetan", "indic",
    "thai",    "spanish", "french",             "german",  "italian",
    "brazilian_portuguese",
};

constexpr std::array<int, kAllGroups.size()> kClassCounts = {
    16, 5, 8, 3, 23, 4, 6, 4, 5, 3, 3};

std::size_t slot(LanguageGroup g) { return static_cast<std::size_t>(g); }

std::vector<DialectLabel> make_labels(LanguageGroup g,
                                      const std::vector<std::string>& names) {
  std::vector<DialectLabel> out;
  out.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.push_back({g, names[i], static_cast<int>(i)});
  }
  return out;
}

}  // namespace

std::string_view group_id(LanguageGroup g) { return kGroupIds.at(slot(g)); }

LanguageGroup parse_group(std::string_view s) {
  for (std::size_t i = 0; i < kGroupIds.size(); ++i) {
    if (kGroupIds[i] == s) return kAllGroups[i];
  }
  throw Error("unknown language group: " + std::string(s));
}

int expected_class_count(LanguageGroup g) { return kClassCounts.at(slot(g)); }

const Taxonomy& Taxonomy::builtin() {
  static const Taxonomy t = from_documents(builtin_taxonomy_documents());
  return t;
}

Taxonomy Taxonomy::from_documents(const std::vector<std::string>& json_docs) {
  Taxonomy t;
  std::set<std::string> versions;
  for (const auto& text : json_docs) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(std::string("taxonomy document is not valid JSON: ") +
                  e.what());
    }
    const LanguageGroup g = parse_group(doc.at("group").get<std::string>());
    versions.insert(doc.value("version", std::string("unversioned")));
    auto& gd = t.groups_[slot(g)];
    if (gd.present) {
      throw Error("duplicate taxonomy document for group " +
                  std::string(group_id(g)));
    }
    t.set_labels(g, doc.at("labels").get<std::vector<std::string>>());
    for (const auto& m : doc.value("maps", json::array())) {
      LabelMap map;
      map.group = g;
      map.dataset_id = m.at("dataset_id").get<std::string>();
      for (const auto& [raw, target] : m.at("entries").items()) {
        if (target.is_null()) {
          map.entries.emplace(raw, std::nullopt);
        } else {
          map.entries.emplace(raw, target.get<std::string>());
        }
      }
      const auto fb = m.value("fallback", json());
      if (fb.is_null() || fb == "error") {
        map.fallback = LabelMap::Fallback::error;
      } else if (fb == "exclude") {
        map.fallback = LabelMap::Fallback::exclude;
      } else {
        map.fallback = LabelMap::Fallback::label;
        map.fallback_label = fb.get<std::string>();
      }
      t.add_map(std::move(map));
    }
  }
  if (versions.size() > 1) {
    // Mixed versions are reported by validate(); keep a combined tag here.
    std::string v;
    for (const auto& s : versions) v += (v.empty() ? "" : "+") + s;
    t.version_ = v;
  } else {
    t.version_ = versions.empty() ? "empty" : *versions.begin();
  }
  return t;
}

Taxonomy Taxonomy::from_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> docs;
  for (const auto& f : files) docs.push_back(read_file(f));
  return from_documents(docs);
}

const Taxonomy::GroupData& Taxonomy::group_data(LanguageGroup g) const {
  const auto i = slot(g);
  if (i >= groups_.size()) throw Error("unknown language group");
  if (!groups_[i].present) {
    throw Error("language group not loaded: " + std::string(group_id(g)));
  }
  return groups_[i];
}

const std::vector<DialectLabel>& Taxonomy::canonical_labels(
    LanguageGroup g) const {
  return group_data(g).labels;
}

const DialectLabel& Taxonomy::label(LanguageGroup g,
                                    std::string_view name) const {
  for (const auto& l : group_data(g).labels) {
    if (l.name == name) return l;
  }
  throw Error("'" + std::string(name) + "' is not a " +
              std::string(group_id(g)) + " label");
}

const DialectLabel& Taxonomy::label(LanguageGroup g, int index) const {
  const auto& labels = group_data(g).labels;
  if (index < 0 || index >= static_cast<int>(labels.size())) {
    throw Error("class index " + std::to_string(index) + " out of range for " +
                std::string(group_id(g)));
  }
  return labels[static_cast<std::size_t>(index)];
}

bool Taxonomy::has_map(LanguageGroup g, std::string_view dataset_id) const {
  const auto& maps = groups_[slot(g)].maps;
  return maps.find(dataset_id) != maps.end();
}

const LabelMap& Taxonomy::label_map(LanguageGroup g,
                                    std::string_view dataset_id) const {
  const auto& gd = group_data(g);
  auto it = gd.maps.find(dataset_id);
  if (it == gd.maps.end()) {
    throw Error("no label map registered for dataset '" +
                std::string(dataset_id) + "' in group " +
                std::string(group_id(g)));
  }
  return it->second;
}

std::vector<std::string> Taxonomy::dataset_ids(LanguageGroup g) const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : group_data(g).maps) ids.push_back(id);
  return ids;
}

std::optional<DialectLabel> Taxonomy::map_raw_label(
    const LabelMap& map, std::string_view raw) const {
  auto it = map.entries.find(std::string(raw));
  if (it != map.entries.end()) {
    if (!it->second) return std::nullopt;
    return label(map.group, *it->second);
  }
  switch (map.fallback) {
    case LabelMap::Fallback::exclude:
      return std::nullopt;
    case LabelMap::Fallback::label:
      return label(map.group, map.fallback_label);
    case LabelMap::Fallback::error:
      break;
  }
  throw Error("unmapped raw label '" + std::string(raw) + "' in dataset '" +
              map.dataset_id + "' (group " + std::string(group_id(map.group)) +
              ")");
}

std::vector<std::string> Taxonomy::validate() const {
  std::vector<std::string> v;
  if (version_.find('+') != std::string::npos) {
    v.push_back("taxonomy documents carry mixed versions: " + version_);
  }
  for (const auto g : kAllGroups) {
    const auto& gd = groups_[slot(g)];
    const std::string gid(group_id(g));
    if (!gd.present) {
      v.push_back(gid + ": group missing");
      continue;
    }
    const int expected = expected_class_count(g);
    if (static_cast<int>(gd.labels.size()) != expected) {
      v.push_back(gid + ": has " + std::to_string(gd.labels.size()) +
                  " classes, expected " + std::to_string(expected));
    }
    std::set<std::string> names;
    for (const auto& l : gd.labels) {
      if (!names.insert(l.name).second) {
        v.push_back(gid + ": duplicate label '" + l.name + "'");
      }
    }
    for (const auto& [ds, map] : gd.maps) {
      for (const auto& [raw, target] : map.entries) {
        if (target && !names.count(*target)) {
          v.push_back(gid + "/" + ds + ": raw '" + raw + "' maps to '" +
                      *target + "', which is not a canonical label");
        }
      }
      if (map.fallback == LabelMap::Fallback::label &&
          !names.count(map.fallback_label)) {
        v.push_back(gid + "/" + ds + ": fallback label '" +
                    map.fallback_label + "' is not a canonical label");
      }
    }
  }
  return v;
}

void Taxonomy::set_labels(LanguageGroup g, std::vector<std::string> names) {
  auto& gd = groups_[slot(g)];
  gd.present = true;
  gd.labels = make_labels(g, names);
  // Every group carries an identity map so canonical-labelled manifests ingest.
  LabelMap& identity = gd.maps[std::string(kCanonicalDataset)];
  identity.dataset_id = std::string(kCanonicalDataset);
  identity.group = g;
  identity.entries.clear();
  for (const auto& n : names) identity.entries.emplace(n, n);
}

void Taxonomy::add_map(LabelMap map) {
  auto& gd = groups_[slot(map.group)];
  gd.present = true;
  const std::string id = map.dataset_id;
  gd.maps.insert_or_assign(id, std::move(map));
}

}  // namespace voxlect
