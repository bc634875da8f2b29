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

// covchange: command-line front end for the covariance change experiments.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "covchange/config.hpp"
#include "covchange/experiment.hpp"

namespace {

using covchange::ExperimentConfig;
using covchange::ExperimentKind;

// A config argument is a file path, or failing that the name of a preset.
ExperimentConfig load(const std::string& arg) {
  if (std::filesystem::exists(arg)) return covchange::load_config_file(arg);
  if (auto text = covchange::preset_text(arg)) return covchange::parse_config(*text);
  throw std::runtime_error("'" + arg + "' is neither a readable file nor a preset name");
}

int run(const std::string& arg, std::optional<ExperimentKind> force, const covchange::RunOptions& opts) {
  ExperimentConfig cfg = load(arg);
  if (force) cfg.kind = *force;
  const auto result = covchange::run_experiment(cfg, opts);
  std::cout << "manifest: " << result.manifest_path << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel covariance change detection experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", covchange::version());

  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string output_dir;
  bool trace = false;
  std::uint64_t seed_override = 0;
  app.add_option("--workers", workers, "Worker threads for Monte Carlo trials")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--output-dir", output_dir, "Directory for CSV files and the manifest");
  app.add_flag("--trace", trace, "Also write per-interval detector trajectories");
  auto* seed_opt = app.add_option("--seed-override", seed_override, "Replace the config seed");

  std::string config;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment a config describes");
  run_cmd->add_option("config", config, "Config file or preset name")->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "Threshold sweep: FAR/CADD trade-off per detector");
  sweep_cmd->add_option("config", config, "Config file or preset name")->required();
  auto* div_cmd = app.add_subcommand("divergence", "Closed-form Phi against Monte Carlo Gamma");
  div_cmd->add_option("config", config, "Config file or preset name")->required();
  auto* thm_cmd = app.add_subcommand("verify-theorem1", "CADD/(-log FAR) against 1/Phi for CUSUM");
  thm_cmd->add_option("config", config, "Config file or preset name")->required();

  auto* presets_cmd = app.add_subcommand("presets", "Shipped experiment presets");
  presets_cmd->require_subcommand(1);
  presets_cmd->add_subcommand("list", "List preset names");
  std::string preset_name;
  auto* show_cmd = presets_cmd->add_subcommand("show", "Print a preset");
  show_cmd->add_option("name", preset_name, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);

  covchange::RunOptions opts;
  opts.workers = workers;
  opts.trace = trace;
  opts.log = &std::cerr;
  if (*out_opt) opts.output_dir = output_dir;
  if (*seed_opt) opts.seed_override = seed_override;

  try {
    if (*run_cmd) return run(config, std::nullopt, opts);
    if (*sweep_cmd) return run(config, ExperimentKind::sweep, opts);
    if (*div_cmd) return run(config, ExperimentKind::divergence, opts);
    if (*thm_cmd) return run(config, ExperimentKind::theorem1, opts);
    if (*presets_cmd) {
      if (presets_cmd->got_subcommand("list")) {
        for (const auto& name : covchange::preset_names()) std::cout << name << '\n';
        return 0;
      }
      const auto text = covchange::preset_text(preset_name);
      if (!text) {
        std::cerr << "unknown preset '" << preset_name << "'\n";
        return 2;
      }
      std::cout << *text;
      return 0;
    }
  } catch (const covchange::ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const covchange::ConfigValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
