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

#include "covchange/experiment.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "covchange/likelihood.hpp"

#ifndef COVCHANGE_VERSION
#define COVCHANGE_VERSION "0.0.0"
#endif

namespace covchange {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTagDivergence = 9;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {
    if (opts.seed_override) cfg_.seed = *opts.seed_override;
    if (opts.output_dir) cfg_.output_dir = *opts.output_dir;
    validate_config(cfg_);
    fs::create_directories(cfg_.output_dir);
  }

  RunResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    switch (cfg_.kind) {
      case ExperimentKind::sweep:
        run_sweeps();
        break;
      case ExperimentKind::theorem1:
        run_theorem1();
        break;
      case ExperimentKind::timing:
        run_timing();
        break;
      case ExperimentKind::divergence:
        run_divergence();
        break;
    }
    if (opts_.trace) run_traces();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(wall);
    return result_;
  }

 private:
  std::string path_for(const std::string& stem) const {
    return (fs::path(cfg_.output_dir) / (cfg_.name + "__" + stem + ".csv")).string();
  }

  void emit(const std::string& path, const std::string& content) {
    write_file_atomic(path, content);
    result_.files.push_back(path);
    log() << "wrote " << path << '\n';
  }

  std::ostream& log() {
    static std::ostream null(nullptr);
    return opts_.log ? *opts_.log : null;
  }

  void run_sweeps() {
    for (const auto& scenario : cfg_.scenarios()) {
      const PreparedScenario prepared(scenario);
      for (const auto& det : cfg_.detectors) {
        if (det.spec.kind == DetectorKind::noop) continue;
        log() << "sweep " << det.spec.name() << " on " << scenario.id << " (" << det.thetas.size()
              << " thresholds)\n";
        const auto points = sweep_tradeoff(prepared, det.spec, cfg_.sweep_config(det, opts_.workers));
        for (const auto& p : points) {
          log() << "  theta=" << fmt(p.theta) << " -logFAR=" << fmt(p.neg_log_far) << " CADD=" << fmt(p.cadd)
                << " censored=" << p.censored << '\n';
          if (p.all_censored) {
            log() << "  all FAR runs censored at theta=" << fmt(p.theta) << '\n';
            result_.exit_code = 1;
          }
        }
        std::ostringstream csv;
        write_tradeoff_csv(csv, points, det.spec.name(), scenario.id);
        emit(path_for(det.spec.name() + "__" + scenario.id), csv.str());
      }
    }
  }

  void run_theorem1() {
    for (const auto& scenario : cfg_.scenarios()) {
      const PreparedScenario prepared(scenario);
      for (const auto& det : cfg_.detectors) {
        if (det.spec.kind != DetectorKind::cusum) continue;
        log() << "theorem1 on " << scenario.id << ", 1/Phi = " << fmt(1.0 / prepared.divergence()) << '\n';
        const auto rows = verify_theorem1(prepared, cfg_.sweep_config(det, opts_.workers), det.spec.llr_sampling);
        for (const auto& r : rows) {
          log() << "  theta=" << fmt(r.point.theta) << " ratio=" << fmt(r.ratio) << " asymptote=" << fmt(r.asymptote)
                << '\n';
          if (r.point.all_censored) result_.exit_code = 1;
        }
        std::ostringstream csv;
        write_theorem1_csv(csv, rows, scenario.id);
        emit(path_for("theorem1__" + det.spec.name() + "__" + scenario.id), csv.str());
      }
    }
  }

  void run_timing() {
    std::vector<DetectorSpec> specs;
    for (const auto& det : cfg_.detectors) specs.push_back(det.spec);
    for (const auto& scenario : cfg_.scenarios()) {
      const PreparedScenario prepared(scenario);
      log() << "timing on " << scenario.id << '\n';
      const auto rows =
          time_detectors(specs, prepared, cfg_.harness.timing_trials, cfg_.harness.timing_horizon, cfg_.seed);
      for (const auto& r : rows) {
        log() << "  " << r.detector << ": " << fmt(r.per_interval_ms) << " ms/interval, " << fmt(r.per_decision_ms)
              << " ms/decision\n";
      }
      std::ostringstream csv;
      write_timing_csv(csv, rows, scenario.id);
      emit(path_for("timing__" + scenario.id), csv.str());
    }
  }

  void run_divergence() {
    const auto rows = divergence_tool(cfg_, cfg_.seed);
    std::ostringstream csv;
    csv << "scenario_id,phi,gamma,gamma_stderr,agree\n";
    for (const auto& r : rows) {
      log() << r.scenario_id << ": Phi=" << fmt(r.phi) << " Gamma=" << fmt(r.gamma) << " +- " << fmt(r.gamma_stderr)
            << (r.agree ? "" : "  (disagree beyond 4 sigma)") << '\n';
      csv << r.scenario_id << ',' << fmt(r.phi) << ',' << fmt(r.gamma) << ',' << fmt(r.gamma_stderr) << ','
          << (r.agree ? 1 : 0) << '\n';
      if (!r.agree) result_.exit_code = 1;
    }
    emit(path_for("divergence"), csv.str());
  }

  void run_traces() {
    for (const auto& scenario : cfg_.scenarios()) {
      const PreparedScenario prepared(scenario);
      for (const auto& det : cfg_.detectors) {
        const Trace trace = trace_detector(prepared, det.spec, scenario.horizon, cfg_.seed);
        std::ostringstream csv;
        write_trace_csv(csv, trace);
        emit(path_for("trace__" + det.spec.name() + "__" + scenario.id), csv.str());
      }
    }
  }

  void write_manifest(double wall_seconds) {
    std::ostringstream m;
    m << "experiment: " << cfg_.name << '\n';
    m << "kind: " << to_string(cfg_.kind) << '\n';
    m << "config_sha256: " << sha256_hex(serialize_config(cfg_)) << '\n';
    m << "seed: " << cfg_.seed << '\n';
    m << "version: " << version() << '\n';
    m << "workers: " << opts_.workers << '\n';
    m << "wall_time_s: " << fmt(wall_seconds) << '\n';
    m << "exit_code: " << result_.exit_code << '\n';
    m << "files:\n";
    for (const auto& f : result_.files) m << "  - " << fs::path(f).filename().string() << '\n';
    const std::string path = (fs::path(cfg_.output_dir) / (cfg_.name + "__manifest.txt")).string();
    write_file_atomic(path, m.str());
    result_.manifest_path = path;
  }

  ExperimentConfig cfg_;
  RunOptions opts_;
  RunResult result_;
};

}  // namespace

const char* version() { return COVCHANGE_VERSION; }

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.workers < 1) throw InvalidParameter("workers must be >= 1");
  return Runner(cfg, opts).run();
}

std::vector<DivergenceRow> divergence_tool(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::vector<DivergenceRow> rows;
  const auto scenarios = cfg.scenarios();
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const PreparedScenario prepared(scenarios[i]);
    Rng rng = Rng::keyed(seed, kTagDivergence, i);
    const MonteCarloEstimate mc =
        kl_divergence_mc(*prepared.c1(), *prepared.c0(), cfg.harness.divergence_samples, rng);
    DivergenceRow r;
    r.scenario_id = scenarios[i].id;
    r.phi = prepared.divergence();
    r.gamma = mc.estimate;
    r.gamma_stderr = mc.stderr;
    r.agree = std::abs(r.gamma - r.phi) <= 4.0 * r.gamma_stderr;
    rows.push_back(r);
  }
  return rows;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, target);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace covchange
