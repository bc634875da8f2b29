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

// Python bindings: models, estimators, detectors and the experiment runner.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covchange/config.hpp"
#include "covchange/covest.hpp"
#include "covchange/detectors.hpp"
#include "covchange/experiment.hpp"
#include "covchange/harness.hpp"
#include "covchange/likelihood.hpp"
#include "covchange/onering.hpp"

namespace py = pybind11;
using namespace covchange;

namespace {

HermitianMatrix herm(const CMatrix& m) { return HermitianMatrix::from_entries(m); }

Scenario onering_scenario(int tx, int rx, double delta, double aod, double spread, double wavelength) {
  OneRingModel m;
  m.pre.tx_antennas = tx;
  m.pre.rx_antennas = rx;
  m.pre.aod_deg = aod;
  m.pre.spread_deg = spread;
  m.pre.wavelength_m = wavelength;
  m.delta_aod_deg = delta;
  Scenario s;
  s.id = "python";
  s.model = m;
  s.change_point = 1;
  return s;
}

py::dict point_dict(const TradeoffPoint& p) {
  py::dict d;
  d["theta"] = p.theta;
  d["far"] = p.far;
  d["neg_log_far"] = p.neg_log_far;
  d["far_stderr"] = p.far_stderr;
  d["cadd"] = p.cadd;
  d["cadd_stderr"] = p.cadd_stderr;
  d["censored"] = p.censored;
  d["trials_far"] = p.trials_far;
  d["trials_delay"] = p.trials_delay;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Channel covariance change detection";
  m.attr("__version__") = version();

  py::register_exception<ConfigParseError>(m, "ConfigParseError", PyExc_ValueError);
  py::register_exception<ConfigValidationError>(m, "ConfigValidationError", PyExc_ValueError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<NotHermitianError>(m, "NotHermitianError", PyExc_ValueError);
  py::register_exception<NotPositiveDefiniteError>(m, "NotPositiveDefiniteError", PyExc_ValueError);

  m.def(
      "onering_covariance",
      [](int tx, int rx, double aod, double spread, double wavelength, int nodes) {
        OneRingParams p;
        p.tx_antennas = tx;
        p.rx_antennas = rx;
        p.aod_deg = aod;
        p.spread_deg = spread;
        p.wavelength_m = wavelength;
        p.quadrature_nodes = nodes;
        return onering_covariance(p).entries();
      },
      py::arg("tx_antennas") = 8, py::arg("rx_antennas") = 2, py::arg("aod_deg") = 0.0,
      py::arg("spread_deg") = 30.0, py::arg("wavelength_m") = 0.15, py::arg("quadrature_nodes") = 1024);

  m.def(
      "noise_floor",
      [](int tx, double power_dbm, double distance_km, double bandwidth_hz, double psd, int pilot_len) {
        return LinkBudget(LinkParams{power_dbm, distance_km, bandwidth_hz, psd, pilot_len}, tx).noise_floor();
      },
      py::arg("tx_antennas") = 8, py::arg("tx_power_dbm") = 23.0, py::arg("distance_km") = 0.1,
      py::arg("bandwidth_hz") = 10e6, py::arg("noise_psd_dbm_hz") = -169.0, py::arg("pilot_len") = 8);

  m.def(
      "logdet", [](const CMatrix& a) { return logdet_psd(herm(a)); }, py::arg("a"));
  m.def(
      "ld_divergence",
      [](const CMatrix& c1, const CMatrix& c0, double floor) {
        return ld_divergence(RegularizedCov(herm(c1), floor), RegularizedCov(herm(c0), floor));
      },
      py::arg("c1"), py::arg("c0"), py::arg("noise_floor"));
  m.def(
      "llr",
      [](const CVector& h, const CMatrix& c0, const CMatrix& c1, double floor) {
        return llr(h, RegularizedCov(herm(c0), floor), RegularizedCov(herm(c1), floor));
      },
      py::arg("h"), py::arg("c0"), py::arg("c1"), py::arg("noise_floor"));

  m.def(
      "ml_covariance",
      [](const CMatrix& s, int n, double beta_l, double beta_u, double floor) {
        return ml_covariance(SampleCovariance{herm(s), n}, MlBounds{beta_l, beta_u}, floor).entries();
      },
      py::arg("sample_covariance"), py::arg("n_samples"), py::arg("beta_l"), py::arg("beta_u"),
      py::arg("noise_floor"));
  m.def(
      "shrinkage_weight",
      [](const CMatrix& s, int n) { return shrinkage_weight(SampleCovariance{herm(s), n}); },
      py::arg("sample_covariance"), py::arg("n_samples"));

  m.def(
      "cusum",
      [](const std::vector<double>& llrs, double theta) {
        Trace trace;
        const DetectorVerdict v = cusum_detect_llr(llrs, theta, &trace);
        std::vector<double> w;
        std::vector<std::int64_t> p;
        for (const auto& r : trace) {
          w.push_back(r.statistic);
          p.push_back(r.candidate_p);
        }
        py::dict d;
        d["alarmed"] = v.alarmed;
        d["alarm_interval"] = v.alarm_interval;
        d["estimated_change_point"] = v.estimated_change_point;
        d["w"] = w;
        d["candidate_p"] = p;
        return d;
      },
      py::arg("llrs"), py::arg("theta"));

  m.def(
      "divergence",
      [](double delta, int tx, int rx) { return PreparedScenario(onering_scenario(tx, rx, delta, 0.0, 30.0, 0.15)).divergence(); },
      py::arg("delta_aod_deg"), py::arg("tx_antennas") = 8, py::arg("rx_antennas") = 2);

  m.def(
      "sweep",
      [](double delta, const std::string& detector, std::vector<double> thetas, std::int64_t trials_far,
         std::int64_t trials_delay, std::int64_t max_run_length, std::vector<std::int64_t> nu_grid,
         std::uint64_t seed, int workers) {
        DetectorSpec spec;
        spec.kind = detector_from_string(detector);
        SweepConfig cfg;
        cfg.thetas = std::move(thetas);
        cfg.trials_far = trials_far;
        cfg.trials_delay = trials_delay;
        cfg.max_run_length = max_run_length;
        cfg.nu_grid = std::move(nu_grid);
        cfg.seed = seed;
        cfg.workers = workers;
        std::vector<TradeoffPoint> pts;
        {
          py::gil_scoped_release release;
          pts = sweep_tradeoff(PreparedScenario(onering_scenario(8, 2, delta, 0.0, 30.0, 0.15)), spec, cfg);
        }
        py::list out;
        for (const auto& p : pts) out.append(point_dict(p));
        return out;
      },
      py::arg("delta_aod_deg"), py::arg("detector") = "cusum", py::arg("thetas"), py::arg("trials_far") = 500,
      py::arg("trials_delay") = 500, py::arg("max_run_length") = 100000,
      py::arg("nu_grid") = std::vector<std::int64_t>{1, 5, 10, 25, 50}, py::arg("seed") = 1,
      py::arg("workers") = 1);

  m.def("preset_names", &preset_names);
  m.def("preset_text", &preset_text, py::arg("name"));
  m.def(
      "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("text"));
  m.def(
      "run_experiment",
      [](const std::string& text, const std::string& output_dir, int workers, bool trace) {
        const ExperimentConfig cfg = parse_config(text);
        RunOptions opts;
        opts.output_dir = output_dir;
        opts.workers = workers;
        opts.trace = trace;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg, opts);
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["files"] = r.files;
        d["manifest"] = r.manifest_path;
        return d;
      },
      py::arg("config_text"), py::arg("output_dir"), py::arg("workers") = 1, py::arg("trace") = false);
}
