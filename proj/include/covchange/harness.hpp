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
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "covchange/detectors.hpp"
#include "covchange/likelihood.hpp"
#include "covchange/onering.hpp"

namespace covchange {

enum class DetectorKind { cusum, glr, wlglr, offline, noop };

std::string_view to_string(DetectorKind kind);
DetectorKind detector_from_string(std::string_view name);

/// How a known-covariance CUSUM run draws its LLRs: from the exact scalar law
/// (fast) or by sampling channel estimates and evaluating densities.
enum class LlrSampling { law, channel };

std::string_view to_string(LlrSampling mode);
LlrSampling llr_sampling_from_string(std::string_view name);

struct DetectorSpec {
  DetectorKind kind = DetectorKind::cusum;
  /// Free-form label for CSV rows; defaults to the kind name.
  std::string label;
  EstimatorSpec estimator;
  std::int64_t xi = 40;
  std::int64_t xi_bar = 15;
  /// Intervals before the full GLR is armed.
  std::int64_t glr_warmup = 0;
  /// Off-line covariance interval length.
  std::int64_t block_len = 10;
  LlrSampling llr_sampling = LlrSampling::law;

  std::string name() const { return label.empty() ? std::string(to_string(kind)) : label; }
  /// Intervals at the start of a stream where this detector cannot alarm.
  std::int64_t warmup() const;
  void validate() const;
  bool operator==(const DetectorSpec&) const = default;
};

struct SweepConfig {
  std::vector<double> thetas;
  std::int64_t trials_far = 500;
  std::int64_t trials_delay = 500;
  /// Censoring cap for run lengths, in armed intervals.
  std::int64_t max_run_length = 100000;
  /// Change points (armed time) over which the worst conditional delay is taken.
  std::vector<std::int64_t> nu_grid{1, 5, 10, 25, 50};
  std::uint64_t seed = 1;
  int workers = 1;

  void validate() const;
  bool operator==(const SweepConfig&) const = default;
};

/// Both covariances of a scenario, regularized, with samplers and LLR laws.
/// The post-change matrix is built even if the scenario never changes.
class PreparedScenario {
 public:
  explicit PreparedScenario(const Scenario& scenario);

  const Scenario& scenario() const { return scenario_; }
  Index dim() const { return c0_->dim(); }
  double noise_floor() const { return c0_->noise_floor(); }
  const std::shared_ptr<const RegularizedCov>& c0() const { return c0_; }
  const std::shared_ptr<const RegularizedCov>& c1() const { return c1_; }
  const std::shared_ptr<const ChannelSampler>& pre_sampler() const { return pre_; }
  const std::shared_ptr<const ChannelSampler>& post_sampler() const { return post_; }
  const LlrLaw& pre_law() const { return *pre_law_; }
  const LlrLaw& post_law() const { return *post_law_; }
  /// Phi = ld_divergence(c1, c0).
  double divergence() const;

 private:
  Scenario scenario_;
  std::shared_ptr<const RegularizedCov> c0_, c1_;
  std::shared_ptr<const ChannelSampler> pre_, post_;
  std::shared_ptr<const LlrLaw> pre_law_, post_law_;
};

std::unique_ptr<OnlineDetector> make_online_detector(const DetectorSpec& spec,
                                                     const PreparedScenario& prepared);

struct FarEstimate {
  double theta = 0.0;
  double far = 1.0;
  double stderr = 0.0;
  double mean_run_length = 1.0;
  std::int64_t censored = 0;
  std::int64_t trials = 0;
  bool all_censored = false;
};

struct NuDelay {
  std::int64_t nu = 1;
  double mean = 0.0;
  double stderr = 0.0;
  std::int64_t used = 0;
  std::int64_t false_alarms = 0;
  std::int64_t censored = 0;
};

struct CaddEstimate {
  double theta = 0.0;
  double cadd = 0.0;
  double stderr = 0.0;
  std::int64_t worst_nu = 1;
  /// Delay trials run per change point.
  std::int64_t trials = 0;
  std::vector<NuDelay> per_nu;
  /// Some change point had every trial false-alarm before it.
  bool empty_conditioning = false;
};

struct TradeoffPoint {
  double theta = 0.0;
  double far = 1.0;
  double neg_log_far = 0.0;
  double far_stderr = 0.0;
  double cadd = 0.0;
  double cadd_stderr = 0.0;
  std::int64_t censored = 0;
  std::int64_t trials_far = 0;
  std::int64_t trials_delay = 0;
  std::int64_t worst_nu = 1;
  bool all_censored = false;
};

/// FAR for every threshold from one set of no-change runs (each run serves all
/// thresholds; it stops once the largest is crossed or at the cap).
std::vector<FarEstimate> estimate_far_sweep(const PreparedScenario& prepared, const DetectorSpec& spec,
                                            const SweepConfig& cfg);
FarEstimate estimate_far(const PreparedScenario& prepared, const DetectorSpec& spec, double theta,
                         const SweepConfig& cfg);

std::vector<CaddEstimate> estimate_cadd_sweep(const PreparedScenario& prepared,
                                              const DetectorSpec& spec, const SweepConfig& cfg);
CaddEstimate estimate_cadd(const PreparedScenario& prepared, const DetectorSpec& spec, double theta,
                           const SweepConfig& cfg);

/// One point per threshold, in threshold order.
std::vector<TradeoffPoint> sweep_tradeoff(const PreparedScenario& prepared, const DetectorSpec& spec,
                                          const SweepConfig& cfg);

/// Linear interpolation of CADD at a target -log FAR between the two
/// neighbouring sweep points; nullopt if the target lies outside the sweep.
std::optional<double> cadd_at_neg_log_far(const std::vector<TradeoffPoint>& points, double target);

struct Theorem1Row {
  TradeoffPoint point;
  double ratio = 0.0;
  double ratio_stderr = 0.0;
  double asymptote = 0.0;
};

/// Known-covariance CUSUM sweep; ratio = CADD / (-log FAR), asymptote = 1/Phi.
std::vector<Theorem1Row> verify_theorem1(const PreparedScenario& prepared, const SweepConfig& cfg,
                                         LlrSampling sampling = LlrSampling::law);

struct TimingRow {
  std::string detector;
  double per_interval_ms = 0.0;
  double per_decision_ms = 0.0;
  std::int64_t intervals = 0;
  std::int64_t decisions = 0;
  double estimator_calls_per_decision = 0.0;
};

/// Wall time per interval under identical streams of `horizon` samples.
/// Off-line detectors decide once per block; their per-interval figure is
/// the decision cost spread over the block.
std::vector<TimingRow> time_detectors(const std::vector<DetectorSpec>& specs,
                                      const PreparedScenario& prepared, std::int64_t trials,
                                      std::int64_t horizon, std::uint64_t seed);

/// Full statistic trajectory of one detector over one simulated stream.
Trace trace_detector(const PreparedScenario& prepared, const DetectorSpec& spec, std::int64_t horizon,
                     std::uint64_t seed);

/// Runs fn(i) for i in [0, n) on `workers` threads. Results are whatever fn
/// stores by index, so scheduling cannot change them.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn);

extern const char* const kTradeoffCsvHeader;

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffPoint>& points,
                        const std::string& detector, const std::string& scenario_id,
                        bool header = true);
void write_theorem1_csv(std::ostream& out, const std::vector<Theorem1Row>& rows,
                        const std::string& scenario_id, bool header = true);
void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows,
                      const std::string& scenario_id, bool header = true);

}  // namespace covchange
