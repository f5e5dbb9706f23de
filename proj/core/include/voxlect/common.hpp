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

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace voxlect {

/// All recoverable failures in the toolkit are reported as voxlect::Error.
/// The message is a single line suitable for a CLI diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mono waveform samples. Sample rate is tracked by the caller.
using Waveform = std::vector<float>;

inline constexpr int kTargetSampleRate = 16000;

/// 64-bit FNV-1a, used for weight fingerprints and config hashes.
class Fnv1a {
 public:
  void update(const void* data, std::size_t n);
  void update(std::string_view s) { update(s.data(), s.size()); }
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 1469598103934665603ULL;
};

/// Writes `contents` to `path` via a temporary sibling and rename, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Resolves `p` against `base` unless it is already absolute.
std::filesystem::path resolve_path(const std::filesystem::path& base,
                                   const std::filesystem::path& p);

using Rng = std::mt19937_64;

/// Independent generator for a named stream under a run seed.
Rng seeded_rng(std::uint64_t seed, std::string_view stream);

std::string code_version();

}  // namespace voxlect
