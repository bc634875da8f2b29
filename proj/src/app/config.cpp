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

#include "covchange/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace covchange {

namespace {

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string where(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) throw ConfigValidationError(path, "expected a mapping" + where(node));
}

void check_keys(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigValidationError(child(path, key), "unknown key" + where(kv.first));
    }
  }
}

template <class T>
T as(const YAML::Node& node, const std::string& path, const char* what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigValidationError(path, std::string("expected ") + what + where(node));
  }
}

template <class T>
void read(const YAML::Node& map, const std::string& path, const char* key, T& out, const char* what) {
  const YAML::Node node = map[key];
  if (!node) return;
  out = as<T>(node, child(path, key), what);
}

template <class T>
void read_list(const YAML::Node& map, const std::string& path, const char* key, std::vector<T>& out,
               const char* what) {
  const YAML::Node node = map[key];
  if (!node) return;
  const std::string p = child(path, key);
  out.clear();
  if (node.IsScalar()) {
    out.push_back(as<T>(node, p, what));
    return;
  }
  if (!node.IsSequence()) throw ConfigValidationError(p, std::string("expected a list of ") + what + where(node));
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(as<T>(node[i], p + "[" + std::to_string(i) + "]", what));
  }
}

// Thin wrappers turning enum parse failures into keyed errors.
template <class F>
auto keyed(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigValidationError(path, e.what());
  }
}

ModelKind model_from_string(const std::string& name, const std::string& path) {
  if (name == "onering") return ModelKind::onering;
  if (name == "scaled_identity") return ModelKind::scaled_identity;
  throw ConfigValidationError(path, "unknown model '" + name + "' (expected onering or scaled_identity)");
}

std::string model_name(ModelKind m) { return m == ModelKind::onering ? "onering" : "scaled_identity"; }

void parse_scenario(const YAML::Node& node, ScenarioBlock& s) {
  const std::string path = "scenario";
  require_map(node, path);
  check_keys(node, path,
             {"id", "model", "tx_antennas", "rx_antennas", "aod_deg", "spread_deg", "wavelength_m",
              "quadrature_nodes", "link", "delta_aod_deg", "change_point", "horizon", "dim", "pre_scale",
              "post_scale", "noise_floor"});
  read(node, path, "id", s.id, "a string");
  if (node["model"]) s.model = model_from_string(as<std::string>(node["model"], "scenario.model", "a string"), "scenario.model");
  read(node, path, "tx_antennas", s.ring.tx_antennas, "an integer");
  read(node, path, "rx_antennas", s.ring.rx_antennas, "an integer");
  read(node, path, "aod_deg", s.ring.aod_deg, "a number");
  read(node, path, "spread_deg", s.ring.spread_deg, "a number");
  read(node, path, "wavelength_m", s.ring.wavelength_m, "a number");
  read(node, path, "quadrature_nodes", s.ring.quadrature_nodes, "an integer");
  read_list(node, path, "delta_aod_deg", s.delta_aod_deg, "numbers");
  if (const YAML::Node cp = node["change_point"]) {
    const std::string text = as<std::string>(cp, "scenario.change_point", "an integer or 'never'");
    if (text == "never") {
      s.change_point.reset();
    } else {
      s.change_point = as<std::int64_t>(cp, "scenario.change_point", "an integer or 'never'");
    }
  }
  read(node, path, "horizon", s.horizon, "an integer");
  read(node, path, "dim", s.identity.dim, "an integer");
  read(node, path, "pre_scale", s.identity.pre_scale, "a number");
  read(node, path, "post_scale", s.identity.post_scale, "a number");
  read(node, path, "noise_floor", s.identity.noise_floor, "a number");
  if (const YAML::Node link = node["link"]) {
    const std::string lp = "scenario.link";
    require_map(link, lp);
    check_keys(link, lp, {"tx_power_dbm", "distance_km", "bandwidth_hz", "noise_psd_dbm_hz", "pilot_len"});
    read(link, lp, "tx_power_dbm", s.link.tx_power_dbm, "a number");
    read(link, lp, "distance_km", s.link.distance_km, "a number");
    read(link, lp, "bandwidth_hz", s.link.bandwidth_hz, "a number");
    read(link, lp, "noise_psd_dbm_hz", s.link.noise_psd_dbm_hz, "a number");
    read(link, lp, "pilot_len", s.link.pilot_len, "an integer");
  }
}

std::vector<double> expand_range(const YAML::Node& node, const std::string& path) {
  require_map(node, path);
  check_keys(node, path, {"start", "stop", "step"});
  if (!node["start"] || !node["stop"] || !node["step"]) {
    throw ConfigValidationError(path, "theta_range needs start, stop and step" + where(node));
  }
  const double start = as<double>(node["start"], child(path, "start"), "a number");
  const double stop = as<double>(node["stop"], child(path, "stop"), "a number");
  const double step = as<double>(node["step"], child(path, "step"), "a number");
  if (!(step > 0.0) || !(stop >= start)) throw ConfigValidationError(path, "need step > 0 and stop >= start");
  std::vector<double> out;
  const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 100000) throw ConfigValidationError(path, "theta_range expands to too many thresholds");
  for (std::int64_t k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

DetectorBlock parse_detector(const YAML::Node& node, const std::string& path) {
  require_map(node, path);
  check_keys(node, path,
             {"kind", "label", "estimator", "beta_l", "beta_u", "xi", "xi_bar", "glr_warmup", "block_len",
              "llr_sampling", "thetas", "theta_range"});
  DetectorBlock d;
  if (!node["kind"]) throw ConfigValidationError(child(path, "kind"), "missing detector kind" + where(node));
  const std::string kind = as<std::string>(node["kind"], child(path, "kind"), "a string");
  d.spec.kind = keyed(child(path, "kind"), [&] { return detector_from_string(kind); });
  read(node, path, "label", d.spec.label, "a string");
  if (node["estimator"]) {
    const std::string e = as<std::string>(node["estimator"], child(path, "estimator"), "a string");
    d.spec.estimator.kind = keyed(child(path, "estimator"), [&] { return estimator_from_string(e); });
  }
  read(node, path, "beta_l", d.spec.estimator.bounds.beta_l, "a number");
  read(node, path, "beta_u", d.spec.estimator.bounds.beta_u, "a number");
  read(node, path, "xi", d.spec.xi, "an integer");
  read(node, path, "xi_bar", d.spec.xi_bar, "an integer");
  read(node, path, "glr_warmup", d.spec.glr_warmup, "an integer");
  read(node, path, "block_len", d.spec.block_len, "an integer");
  if (node["llr_sampling"]) {
    const std::string m = as<std::string>(node["llr_sampling"], child(path, "llr_sampling"), "a string");
    d.spec.llr_sampling = keyed(child(path, "llr_sampling"), [&] { return llr_sampling_from_string(m); });
  }
  if (node["thetas"] && node["theta_range"]) {
    throw ConfigValidationError(path, "give either thetas or theta_range, not both" + where(node));
  }
  read_list(node, path, "thetas", d.thetas, "numbers");
  if (node["theta_range"]) d.thetas = expand_range(node["theta_range"], child(path, "theta_range"));
  return d;
}

void parse_harness(const YAML::Node& node, HarnessBlock& h) {
  const std::string path = "harness";
  require_map(node, path);
  check_keys(node, path,
             {"trials_far", "trials_delay", "max_run_length", "nu_grid", "timing_trials", "timing_horizon",
              "divergence_samples"});
  read(node, path, "trials_far", h.trials_far, "an integer");
  read(node, path, "trials_delay", h.trials_delay, "an integer");
  read(node, path, "max_run_length", h.max_run_length, "an integer");
  read_list(node, path, "nu_grid", h.nu_grid, "integers");
  read(node, path, "timing_trials", h.timing_trials, "an integer");
  read(node, path, "timing_horizon", h.timing_horizon, "an integer");
  read(node, path, "divergence_samples", h.divergence_samples, "an integer");
}

std::string delta_tag(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", delta);
  return buf;
}

void validate_detector(const DetectorBlock& d, const std::string& path, ExperimentKind kind) {
  const auto& b = d.spec.estimator.bounds;
  const bool uses_bounds = d.spec.estimator.kind == EstimatorKind::ml &&
                           (d.spec.kind == DetectorKind::glr || d.spec.kind == DetectorKind::wlglr ||
                            d.spec.kind == DetectorKind::offline);
  if (uses_bounds) {
    if (!(b.beta_l > 0.0)) throw ConfigValidationError(child(path, "beta_l"), "beta_l must be > 0");
    if (!(b.beta_u > b.beta_l)) {
      std::ostringstream msg;
      msg << "beta_u (" << b.beta_u << ") must be greater than beta_l (" << b.beta_l << ")";
      throw ConfigValidationError(child(path, "beta_u") + ", " + child(path, "beta_l"), msg.str());
    }
  }
  if (d.spec.kind == DetectorKind::wlglr && (d.spec.xi_bar < 0 || d.spec.xi_bar >= d.spec.xi)) {
    throw ConfigValidationError(child(path, "xi_bar"), "need 0 <= xi_bar < xi");
  }
  if (d.spec.glr_warmup < 0) throw ConfigValidationError(child(path, "glr_warmup"), "must be >= 0");
  if (d.spec.kind == DetectorKind::offline && d.spec.block_len < 2) {
    throw ConfigValidationError(child(path, "block_len"), "must be >= 2");
  }
  for (std::size_t k = 0; k < d.thetas.size(); ++k) {
    const std::string tp = child(path, "thetas") + "[" + std::to_string(k) + "]";
    if (!std::isfinite(d.thetas[k])) throw ConfigValidationError(tp, "thresholds must be finite");
    if (k > 0 && !(d.thetas[k] > d.thetas[k - 1])) {
      throw ConfigValidationError(tp, "thresholds must be strictly increasing");
    }
    if (d.spec.kind == DetectorKind::cusum && !(d.thetas[k] > 0.0)) {
      throw ConfigValidationError(tp, "cusum thresholds must be > 0");
    }
  }
  const bool swept = kind == ExperimentKind::sweep || kind == ExperimentKind::theorem1;
  if (swept && d.spec.kind != DetectorKind::noop && d.thetas.empty()) {
    throw ConfigValidationError(child(path, "thetas"), "a sweep needs at least one threshold");
  }
  if (swept && d.spec.kind == DetectorKind::noop) {
    throw ConfigValidationError(child(path, "kind"), "the noop detector is only for timing runs");
  }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::sweep:
      return "sweep";
    case ExperimentKind::theorem1:
      return "theorem1";
    case ExperimentKind::timing:
      return "timing";
    case ExperimentKind::divergence:
      return "divergence";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (const auto k : {ExperimentKind::sweep, ExperimentKind::theorem1, ExperimentKind::timing,
                       ExperimentKind::divergence}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidParameter("unknown experiment kind '" + std::string(name) +
                         "' (expected sweep, theorem1, timing or divergence)");
}

std::vector<Scenario> ExperimentConfig::scenarios() const {
  std::vector<Scenario> out;
  if (scenario.model == ModelKind::scaled_identity) {
    Scenario s;
    s.id = scenario.id;
    s.model = scenario.identity;
    s.change_point = scenario.change_point;
    s.horizon = scenario.horizon;
    s.seed = seed;
    out.push_back(s);
    return out;
  }
  for (const double delta : scenario.delta_aod_deg) {
    Scenario s;
    s.id = scenario.id + "_d" + delta_tag(delta);
    s.model = OneRingModel{scenario.ring, delta, scenario.link};
    s.change_point = scenario.change_point;
    s.horizon = scenario.horizon;
    s.seed = seed;
    out.push_back(s);
  }
  return out;
}

SweepConfig ExperimentConfig::sweep_config(const DetectorBlock& detector, int workers) const {
  SweepConfig c;
  c.thetas = detector.thetas;
  c.trials_far = harness.trials_far;
  c.trials_delay = harness.trials_delay;
  c.max_run_length = harness.max_run_length;
  c.nu_grid = harness.nu_grid;
  c.seed = seed;
  c.workers = workers;
  return c;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.name.empty()) throw ConfigValidationError("experiment", "must not be empty");
  const auto& s = cfg.scenario;
  if (s.model == ModelKind::onering && s.delta_aod_deg.empty()) {
    throw ConfigValidationError("scenario.delta_aod_deg", "needs at least one entry");
  }
  for (const auto& sc : cfg.scenarios()) {
    keyed("scenario", [&] {
      sc.validate();
      return 0;
    });
  }
  for (std::size_t i = 0; i < cfg.detectors.size(); ++i) {
    validate_detector(cfg.detectors[i], "detectors[" + std::to_string(i) + "]", cfg.kind);
  }
  const auto& h = cfg.harness;
  switch (cfg.kind) {
    case ExperimentKind::sweep:
    case ExperimentKind::theorem1: {
      if (cfg.detectors.empty()) throw ConfigValidationError("detectors", "a sweep needs at least one detector");
      if (cfg.kind == ExperimentKind::theorem1) {
        bool has_cusum = false;
        for (const auto& d : cfg.detectors) has_cusum |= d.spec.kind == DetectorKind::cusum;
        if (!has_cusum) throw ConfigValidationError("detectors", "theorem1 needs a cusum detector");
      }
      if (h.trials_far < 100) throw ConfigValidationError("harness.trials_far", "must be >= 100");
      if (h.trials_delay < 100) throw ConfigValidationError("harness.trials_delay", "must be >= 100");
      if (h.max_run_length < 1000) throw ConfigValidationError("harness.max_run_length", "must be >= 1000");
      if (h.nu_grid.empty()) throw ConfigValidationError("harness.nu_grid", "must not be empty");
      for (const auto nu : h.nu_grid) {
        if (nu < 1) throw ConfigValidationError("harness.nu_grid", "entries must be >= 1");
      }
      break;
    }
    case ExperimentKind::timing:
      if (cfg.detectors.empty()) throw ConfigValidationError("detectors", "timing needs at least one detector");
      if (h.timing_trials < 50) throw ConfigValidationError("harness.timing_trials", "must be >= 50");
      if (h.timing_horizon < 1) throw ConfigValidationError("harness.timing_horizon", "must be >= 1");
      break;
    case ExperimentKind::divergence:
      if (h.divergence_samples < 1000) {
        throw ConfigValidationError("harness.divergence_samples", "must be >= 1000");
      }
      break;
  }
  if (cfg.output_dir.empty()) throw ConfigValidationError("output.dir", "must not be empty");
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError("parse error at line " + std::to_string(e.mark.line + 1) + ", column " +
                               std::to_string(e.mark.column + 1) + ": " + e.msg,
                           e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ConfigValidationError("scenario", "missing scenario section");
  require_map(root, "");
  check_keys(root, "", {"experiment", "kind", "seed", "scenario", "detectors", "harness", "output"});

  ExperimentConfig cfg;
  read(root, "", "experiment", cfg.name, "a string");
  if (root["kind"]) {
    const std::string k = as<std::string>(root["kind"], "kind", "a string");
    cfg.kind = keyed("kind", [&] { return experiment_kind_from_string(k); });
  }
  read(root, "", "seed", cfg.seed, "a non-negative integer");
  if (!root["scenario"]) throw ConfigValidationError("scenario", "missing scenario section");
  parse_scenario(root["scenario"], cfg.scenario);
  if (const YAML::Node dets = root["detectors"]) {
    if (!dets.IsSequence()) throw ConfigValidationError("detectors", "expected a list" + where(dets));
    for (std::size_t i = 0; i < dets.size(); ++i) {
      cfg.detectors.push_back(parse_detector(dets[i], "detectors[" + std::to_string(i) + "]"));
    }
  }
  if (const YAML::Node h = root["harness"]) parse_harness(h, cfg.harness);
  if (const YAML::Node out = root["output"]) {
    require_map(out, "output");
    check_keys(out, "output", {"dir"});
    read(out, "output", "dir", cfg.output_dir, "a string");
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "experiment" << YAML::Value << cfg.name;
  e << YAML::Key << "kind" << YAML::Value << std::string(to_string(cfg.kind));
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;

  const auto& s = cfg.scenario;
  e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "id" << YAML::Value << s.id;
  e << YAML::Key << "model" << YAML::Value << model_name(s.model);
  if (s.model == ModelKind::onering) {
    e << YAML::Key << "tx_antennas" << YAML::Value << s.ring.tx_antennas;
    e << YAML::Key << "rx_antennas" << YAML::Value << s.ring.rx_antennas;
    e << YAML::Key << "aod_deg" << YAML::Value << s.ring.aod_deg;
    e << YAML::Key << "spread_deg" << YAML::Value << s.ring.spread_deg;
    e << YAML::Key << "wavelength_m" << YAML::Value << s.ring.wavelength_m;
    e << YAML::Key << "quadrature_nodes" << YAML::Value << s.ring.quadrature_nodes;
    e << YAML::Key << "delta_aod_deg" << YAML::Value << YAML::Flow << s.delta_aod_deg;
    e << YAML::Key << "link" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "tx_power_dbm" << YAML::Value << s.link.tx_power_dbm;
    e << YAML::Key << "distance_km" << YAML::Value << s.link.distance_km;
    e << YAML::Key << "bandwidth_hz" << YAML::Value << s.link.bandwidth_hz;
    e << YAML::Key << "noise_psd_dbm_hz" << YAML::Value << s.link.noise_psd_dbm_hz;
    e << YAML::Key << "pilot_len" << YAML::Value << s.link.pilot_len;
    e << YAML::EndMap;
  } else {
    e << YAML::Key << "dim" << YAML::Value << s.identity.dim;
    e << YAML::Key << "pre_scale" << YAML::Value << s.identity.pre_scale;
    e << YAML::Key << "post_scale" << YAML::Value << s.identity.post_scale;
    e << YAML::Key << "noise_floor" << YAML::Value << s.identity.noise_floor;
  }
  e << YAML::Key << "change_point" << YAML::Value;
  if (s.change_point) {
    e << *s.change_point;
  } else {
    e << "never";
  }
  e << YAML::Key << "horizon" << YAML::Value << s.horizon;
  e << YAML::EndMap;

  e << YAML::Key << "detectors" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : cfg.detectors) {
    e << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << std::string(to_string(d.spec.kind));
    if (!d.spec.label.empty()) e << YAML::Key << "label" << YAML::Value << d.spec.label;
    e << YAML::Key << "estimator" << YAML::Value << std::string(to_string(d.spec.estimator.kind));
    e << YAML::Key << "beta_l" << YAML::Value << d.spec.estimator.bounds.beta_l;
    e << YAML::Key << "beta_u" << YAML::Value << d.spec.estimator.bounds.beta_u;
    e << YAML::Key << "xi" << YAML::Value << d.spec.xi;
    e << YAML::Key << "xi_bar" << YAML::Value << d.spec.xi_bar;
    e << YAML::Key << "glr_warmup" << YAML::Value << d.spec.glr_warmup;
    e << YAML::Key << "block_len" << YAML::Value << d.spec.block_len;
    e << YAML::Key << "llr_sampling" << YAML::Value << std::string(to_string(d.spec.llr_sampling));
    e << YAML::Key << "thetas" << YAML::Value << YAML::Flow << d.thetas;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  const auto& h = cfg.harness;
  e << YAML::Key << "harness" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "trials_far" << YAML::Value << h.trials_far;
  e << YAML::Key << "trials_delay" << YAML::Value << h.trials_delay;
  e << YAML::Key << "max_run_length" << YAML::Value << h.max_run_length;
  e << YAML::Key << "nu_grid" << YAML::Value << YAML::Flow << h.nu_grid;
  e << YAML::Key << "timing_trials" << YAML::Value << h.timing_trials;
  e << YAML::Key << "timing_horizon" << YAML::Value << h.timing_horizon;
  e << YAML::Key << "divergence_samples" << YAML::Value << h.divergence_samples;
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dir" << YAML::Value << cfg.output_dir;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace covchange
