// Copyright 2026 The covchange Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "covchange/config.hpp"

namespace covchange {

/// Library version string ("0.1.0").
const char* version();

struct RunOptions {
  int workers = 1;
  std::optional<std::string> output_dir;
  bool trace = false;
  std::optional<std::uint64_t> seed_override;
  /// Progress and summaries; nullptr for silence.
  std::ostream* log = nullptr;
};

struct RunResult {
  /// 0 iff every requested computation completed and no FAR point was
  /// entirely censored (and, for divergence runs, Phi and Gamma agreed).
  int exit_code = 0;
  std::vector<std::string> files;
  std::string manifest_path;
};

/// Runs the experiment described by `cfg` and writes its CSV files and a
/// run manifest. Every file is written to a temporary name and renamed into
/// place only when complete.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

struct DivergenceRow {
  std::string scenario_id;
  double phi = 0.0;
  double gamma = 0.0;
  double gamma_stderr = 0.0;
  /// True iff |gamma - phi| <= 4 stderr.
  bool agree = true;
};

/// Phi from the closed form and Gamma by Monte Carlo for every scenario.
std::vector<DivergenceRow> divergence_tool(const ExperimentConfig& cfg, std::uint64_t seed);

/// Writes `content` to `path` via a temporary file and an atomic rename.
void write_file_atomic(const std::string& path, const std::string& content);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

/// Names of the presets compiled into the library, sorted.
std::vector<std::string> preset_names();
/// YAML text of a preset, or nullopt if unknown.
std::optional<std::string> preset_text(const std::string& name);

}  // namespace covchange
