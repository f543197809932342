// Copyright 2026 The Bystander Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario runner behind the bystander command-line tool. A JSON config
// selects a model, a time grid and one task; outputs are CSV series plus a
// manifest.json with checksums.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace bystander::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Config failed to parse or validate.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::filesystem::path out_dir;
  /// Overrides the config "seed".
  std::optional<std::uint64_t> seed;
  /// Worker threads for trajectory tasks; never changes results.
  unsigned threads = 1;
};

/// Runs a config given as JSON text. Errors go to `err`; returns an exit code.
int run_config_text(const std::string& config_text, const RunOptions& options, std::ostream& err);

int run_config_file(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err);

/// FNV-1a 64 of a byte string, as 16 hex digits.
std::string checksum_hex(const std::string& bytes);

}  // namespace bystander::cli
