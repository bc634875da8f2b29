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

#include <catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "covchange/config.hpp"
#include "covchange/experiment.hpp"

using namespace covchange;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = R"(experiment: small
kind: sweep
seed: 5
scenario:
  id: tiny
  model: scaled_identity
  dim: 1
  pre_scale: 0.999
  post_scale: 1.999
  noise_floor: 0.001
detectors:
  - kind: cusum
    thetas: [1.0, 2.0]
harness:
  trials_far: 100
  trials_delay: 100
  max_run_length: 1000
  nu_grid: [1]
)";

}  // namespace

TEST_CASE("every shipped preset parses and round-trips", "[config]") {
  const auto names = preset_names();
  REQUIRE(names == std::vector<std::string>{"fig4_theorem1", "fig5_general_mimo", "fig6_wlglr",
                                            "fig7_massive_offline", "table1_cpu", "table2_online_offline"});
  for (const auto& name : names) {
    INFO(name);
    const auto text = preset_text(name);
    REQUIRE(text.has_value());
    // The embedded copy is the file in the source tree.
    CHECK(*text == read_file(fs::path(COVCHANGE_PRESET_DIR) / (name + ".yaml")));
    const ExperimentConfig a = parse_config(*text);
    CHECK(a.name == name);
    const ExperimentConfig b = parse_config(serialize_config(a));
    CHECK(a == b);
    CHECK(serialize_config(a) == serialize_config(b));
  }
  CHECK_FALSE(preset_text("nope").has_value());
}

TEST_CASE("general MIMO preset parameters", "[config]") {
  const auto cfg = parse_config(*preset_text("fig5_general_mimo"));
  CHECK(cfg.scenario.ring.tx_antennas == 8);
  CHECK(cfg.scenario.ring.rx_antennas == 2);
  CHECK(cfg.scenario.link.pilot_len == 8);
  CHECK(cfg.scenario.delta_aod_deg == std::vector<double>{0.5, 1.0});
  const auto scenarios = cfg.scenarios();
  REQUIRE(scenarios.size() == 2);
  CHECK(scenarios[0].id == "general_mimo_d0.5");
  CHECK(scenarios[1].id == "general_mimo_d1");
  CHECK(cfg.detectors.at(0).thetas.size() == 15);

  const auto massive = parse_config(*preset_text("fig7_massive_offline"));
  CHECK(massive.scenario.ring.tx_antennas * massive.scenario.ring.rx_antennas == 512);
  CHECK(massive.detectors.at(1).spec.estimator.bounds.beta_u == 45.0);
}

TEST_CASE("empty input names the missing section", "[config]") {
  try {
    parse_config("");
    FAIL("expected an error");
  } catch (const ConfigValidationError& e) {
    CHECK(std::string(e.what()).find("missing scenario section") != std::string::npos);
  }
}

TEST_CASE("inverted ML bounds name both keys", "[config]") {
  std::string text = kSmall;
  text.replace(text.find("  - kind: cusum"), 15, "  - kind: wlglr\n    beta_l: 4.0\n    beta_u: 0.5");
  try {
    parse_config(text);
    FAIL("expected an error");
  } catch (const ConfigValidationError& e) {
    CHECK(e.key_path().find("detectors[0].beta_u") != std::string::npos);
    CHECK(e.key_path().find("detectors[0].beta_l") != std::string::npos);
  }
}

TEST_CASE("unknown keys and malformed text are rejected", "[config]") {
  std::string typo = kSmall;
  typo.replace(typo.find("trials_far"), 10, "trails_far");
  try {
    parse_config(typo);
    FAIL("expected an error");
  } catch (const ConfigValidationError& e) {
    CHECK(e.key_path() == "harness.trails_far");
  }

  try {
    parse_config("scenario: [1, 2\nfoo: bar\n");
    FAIL("expected an error");
  } catch (const ConfigParseError& e) {
    CHECK(e.line() >= 1);
    CHECK(e.column() >= 1);
  }

  std::string neg = kSmall;
  neg.replace(neg.find("trials_far: 100"), 15, "trials_far: 10");
  CHECK_THROWS_AS(parse_config(neg), ConfigValidationError);

  std::string bad_kind = kSmall;
  bad_kind.replace(bad_kind.find("kind: cusum"), 11, "kind: bayes");
  try {
    parse_config(bad_kind);
    FAIL("expected an error");
  } catch (const ConfigValidationError& e) {
    CHECK(e.key_path() == "detectors[0].kind");
  }
}

TEST_CASE("theta ranges and never-changing scenarios", "[config]") {
  std::string text = kSmall;
  text.replace(text.find("thetas: [1.0, 2.0]"), 18, "theta_range: {start: 1.0, stop: 2.0, step: 0.25}");
  const auto cfg = parse_config(text);
  CHECK(cfg.detectors[0].thetas == std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0});

  std::string never = kSmall;
  never.replace(never.find("  noise_floor"), 0, "  change_point: never\n");
  CHECK_FALSE(parse_config(never).scenario.change_point.has_value());
  CHECK(parse_config(serialize_config(parse_config(never))) == parse_config(never));
}

TEST_CASE("running an experiment writes CSVs and a manifest atomically", "[config]") {
  const fs::path dir = fs::temp_directory_path() / "covchange_test_run";
  fs::remove_all(dir);
  const auto cfg = parse_config(kSmall);
  RunOptions opts;
  opts.output_dir = dir.string();
  const auto r1 = run_experiment(cfg, opts);
  CHECK(r1.exit_code == 0);
  REQUIRE(r1.files.size() == 1);
  const std::string first = read_file(r1.files[0]);
  CHECK(first.rfind(std::string(kTradeoffCsvHeader), 0) == 0);

  opts.workers = 2;
  const auto r2 = run_experiment(cfg, opts);
  CHECK(read_file(r2.files[0]) == first);

  const std::string manifest = read_file(r1.manifest_path);
  // The hash covers the effective config, overrides included.
  ExperimentConfig effective = cfg;
  effective.output_dir = dir.string();
  CHECK(manifest.find("config_sha256: " + sha256_hex(serialize_config(effective))) != std::string::npos);
  CHECK(manifest.find("seed: 5") != std::string::npos);
  CHECK(manifest.find(std::string("version: ") + version()) != std::string::npos);
  CHECK(manifest.find("wall_time_s: ") != std::string::npos);
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().string().find(".tmp.") == std::string::npos);

  opts.seed_override = 6;
  const auto r3 = run_experiment(cfg, opts);
  CHECK(read_file(r3.files[0]) != first);
  fs::remove_all(dir);
}

TEST_CASE("theorem check and divergence runs", "[config]") {
  const fs::path dir = fs::temp_directory_path() / "covchange_test_thm";
  fs::remove_all(dir);
  std::string text = kSmall;
  text.replace(text.find("kind: sweep"), 11, "kind: theorem1");
  RunOptions opts;
  opts.output_dir = dir.string();
  const auto r = run_experiment(parse_config(text), opts);
  REQUIRE(r.files.size() == 1);
  const std::string csv = read_file(r.files[0]);
  CHECK(csv.find("ratio") != std::string::npos);
  CHECK(csv.find("asymptote") != std::string::npos);

  std::string div = kSmall;
  div.replace(div.find("kind: sweep"), 11, "kind: divergence");
  auto cfg = parse_config(div);
  cfg.harness.divergence_samples = 200000;
  const auto rows = divergence_tool(cfg, 3);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].phi == Catch::Approx(1.0 - std::log(2.0)).epsilon(1e-12));
  CHECK(rows[0].agree);

  // Identical pre and post: Phi = 0 and Gamma within 3 sigma of zero.
  cfg.scenario.identity.post_scale = cfg.scenario.identity.pre_scale;
  const auto same = divergence_tool(cfg, 3);
  CHECK(same[0].phi == 0.0);
  CHECK(std::abs(same[0].gamma) <= 3.0 * same[0].gamma_stderr + 1e-15);
  fs::remove_all(dir);
}

TEST_CASE("divergence grows with the angle shift", "[config]") {
  auto cfg = parse_config(*preset_text("fig5_general_mimo"));
  cfg.harness.divergence_samples = 20000;
  const auto rows = divergence_tool(cfg, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].phi > rows[0].phi);
}

TEST_CASE("sha256 of a known string", "[config]") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
