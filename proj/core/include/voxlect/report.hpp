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

// Run fingerprints and SVG figures.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "voxlect/metrics.hpp"

namespace voxlect {

/// Writes <dir>/fingerprint.json: the command, its resolved configuration,
/// seed, taxonomy version and code version.
void write_fingerprint(const std::filesystem::path& dir,
                       const std::string& command,
                       const nlohmann::json& resolved_config,
                       std::uint64_t seed, const std::string& taxonomy_version);

/// Horizontal bar chart of per-class counts.
std::string bar_chart_svg(const std::string& title,
                          std::span<const std::string> labels,
                          std::span<const double> values);

/// Row-normalised confusion heatmap with percentages in each cell.
std::string confusion_heatmap_svg(const std::string& title,
                                  const ConfusionMatrix& cm,
                                  std::span<const std::string> class_names);

}  // namespace voxlect
