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

// Unified dialect / regional-language label sets, one per language group,
// plus the per-dataset maps that send raw corpus labels onto them.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voxlect/common.hpp"

namespace voxlect {

enum class LanguageGroup {
  english,
  arabic,
  mandarin_cantonese,
  tibetan,
  indic,
  thai,
  spanish,
  french,
  german,
  italian,
  brazilian_portuguese,
};

inline constexpr std::array<LanguageGroup, 11> kAllGroups = {
    LanguageGroup::english,     LanguageGroup::arabic,
    LanguageGroup::mandarin_cantonese,
    LanguageGroup::tibetan,     LanguageGroup::indic,
    LanguageGroup::thai,        LanguageGroup::spanish,
    LanguageGroup::french,      LanguageGroup::german,
    LanguageGroup::italian,     LanguageGroup::brazilian_portuguese,
};

/// Stable id, usable in file paths ("mandarin_cantonese", ...).
std::string_view group_id(LanguageGroup g);

/// Throws Error("unknown language group: <s>").
LanguageGroup parse_group(std::string_view s);

/// Class inventory per group as published with the benchmark.
int expected_class_count(LanguageGroup g);

struct DialectLabel {
  LanguageGroup group;
  std::string name;
  int index = 0;

  friend bool operator==(const DialectLabel&, const DialectLabel&) = default;
};

/// Raw-label map for one dataset within one group. A mapped value of
/// std::nullopt is the EXCLUDE sentinel.
struct LabelMap {
  enum class Fallback { error, exclude, label };

  std::string dataset_id;
  LanguageGroup group = LanguageGroup::english;
  std::map<std::string, std::optional<std::string>> entries;
  Fallback fallback = Fallback::error;
  std::string fallback_label;  // only for Fallback::label
};

/// Dataset id of the implicit identity map registered for every group.
inline constexpr std::string_view kCanonicalDataset = "canonical";

class Taxonomy {
 public:
  /// The taxonomy compiled in from core/data/taxonomy/*.json.
  static const Taxonomy& builtin();

  /// Parses one JSON document per group. Structural problems (bad JSON,
  /// unknown group id) throw; content problems are left for validate().
  static Taxonomy from_documents(const std::vector<std::string>& json_docs);

  /// Loads every *.json file in `dir`.
  static Taxonomy from_directory(const std::filesystem::path& dir);

  const std::string& version() const { return version_; }

  const std::vector<DialectLabel>& canonical_labels(LanguageGroup g) const;
  int num_classes(LanguageGroup g) const {
    return static_cast<int>(canonical_labels(g).size());
  }

  /// Throws if `name` is not a canonical label of `g`.
  const DialectLabel& label(LanguageGroup g, std::string_view name) const;
  const DialectLabel& label(LanguageGroup g, int index) const;

  bool has_map(LanguageGroup g, std::string_view dataset_id) const;
  /// Throws Error naming the dataset when no map is registered.
  const LabelMap& label_map(LanguageGroup g, std::string_view dataset_id) const;
  std::vector<std::string> dataset_ids(LanguageGroup g) const;

  /// std::nullopt means EXCLUDED. Unknown raw labels without a fallback rule
  /// throw an Error that quotes the raw string.
  std::optional<DialectLabel> map_raw_label(const LabelMap& map,
                                            std::string_view raw) const;

  /// Empty result means the taxonomy is consistent.
  std::vector<std::string> validate() const;

  /// Test hooks for constructing deliberately broken taxonomies.
  void set_labels(LanguageGroup g, std::vector<std::string> names);
  void add_map(LabelMap map);

 private:
  struct GroupData {
    std::vector<DialectLabel> labels;
    std::map<std::string, LabelMap, std::less<>> maps;
    bool present = false;
  };

  const GroupData& group_data(LanguageGroup g) const;

  std::string version_;
  std::array<GroupData, kAllGroups.size()> groups_;
};

}  // namespace voxlect
