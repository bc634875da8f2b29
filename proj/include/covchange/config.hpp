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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "covchange/harness.hpp"
#include "covchange/onering.hpp"

namespace covchange {

/// Malformed text: carries the 1-based line and column of the problem.
class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(const std::string& what, int line, int column)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed text with bad content: carries the offending key path,
/// e.g. "detectors[1].beta_u".
class ConfigValidationError : public std::runtime_error {
 public:
  ConfigValidationError(const std::string& key_path, const std::string& what)
      : std::runtime_error(key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

enum class ExperimentKind { sweep, theorem1, timing, divergence };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class ModelKind { onering, scaled_identity };

struct ScenarioBlock {
  std::string id = "scenario";
  ModelKind model = ModelKind::onering;
  OneRingParams ring;
  LinkParams link;
  /// One scenario per entry (one-ring only).
  std::vector<double> delta_aod_deg{1.0};
  ScaledIdentityModel identity;
  /// 1-based; nullopt = the change never happens.
  std::optional<std::int64_t> change_point = 1;
  std::int64_t horizon = 200;

  bool operator==(const ScenarioBlock&) const = default;
};

struct DetectorBlock {
  DetectorSpec spec;
  std::vector<double> thetas;

  bool operator==(const DetectorBlock&) const = default;
};

struct HarnessBlock {
  std::int64_t trials_far = 500;
  std::int64_t trials_delay = 500;
  std::int64_t max_run_length = 100000;
  std::vector<std::int64_t> nu_grid{1, 5, 10, 25, 50};
  std::int64_t timing_trials = 50;
  std::int64_t timing_horizon = 200;
  std::int64_t divergence_samples = 100000;

  bool operator==(const HarnessBlock&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::sweep;
  std::uint64_t seed = 1;
  ScenarioBlock scenario;
  std::vector<DetectorBlock> detectors;
  HarnessBlock harness;
  std::string output_dir = "out";

  /// Concrete scenarios (one per delta_aod_deg entry for one-ring models).
  std::vector<Scenario> scenarios() const;
  SweepConfig sweep_config(const DetectorBlock& detector, int workers) const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates YAML text. Unknown keys are errors.
/// Throws ConfigParseError or ConfigValidationError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical YAML form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Runs every module-level invariant check; throws ConfigValidationError.
void validate_config(const ExperimentConfig& cfg);

}  // namespace covchange
