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
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "covchange/covest.hpp"
#include "covchange/likelihood.hpp"

namespace covchange {

/// Running CUSUM statistic. Intervals are 1-based; j counts the samples seen.
struct CusumState {
  double w = 0.0;
  /// Earliest p maximizing sum_{l=p..j} LLR_l (first interval after the
  /// last reset). Equals j + 1 while w == 0.
  std::int64_t candidate_p = 1;
  std::int64_t j = 0;
};

/// W_j = max(W_{j-1} + llr, 0).
CusumState cusum_step(const CusumState& state, double llr_value);

struct DetectorVerdict {
  bool alarmed = false;
  std::int64_t alarm_interval = 0;
  std::int64_t estimated_change_point = 0;
  double statistic_at_alarm = 0.0;
};

/// Statistic at one interval together with the change point achieving it.
struct WindowStatistic {
  double value = 0.0;
  std::int64_t argmax_p = 0;
};

/// One row of the optional per-interval trace. `armed` is false while a
/// windowed detector is still warming up (statistic is then NaN).
struct TraceRecord {
  std::int64_t j = 0;
  bool armed = false;
  double statistic = 0.0;
  std::int64_t candidate_p = 0;
};

using Trace = std::vector<TraceRecord>;

/// CSV with header `j,armed,statistic,candidate_p`.
void write_trace_csv(std::ostream& out, const Trace& trace);

struct WlGlrConfig {
  std::int64_t xi = 40;
  std::int64_t xi_bar = 15;
  EstimatorSpec estimator;
  double theta = 0.0;

  void validate() const;
};

struct OfflineConfig {
  std::int64_t block_len = 10;
  EstimatorSpec estimator;
  double theta = 0.0;

  void validate() const;
};

// ---- Window statistics -----------------------------------------------------

/// max over p in [p_lo, p_hi] of the fitted window log-likelihood ratio
///   S(p..j) = fitted_window_loglik(spec(p..j)) - n M log(pi) - sum_{l=p..j} log p0(h_l)
/// where j = history.size() and `pre_loglik[l]` holds log p0 of history[l].
/// Ties go to the earliest p. Uses the spectral form: the window scatter is
/// accumulated backward from j, and the n x n Gram matrix replaces it while
/// n < M. `estimator_calls` (if given) is incremented once per window.
WindowStatistic spectral_window_statistic(std::span<const ChannelEstimate> history,
                                          std::span<const double> pre_loglik, std::int64_t p_lo,
                                          std::int64_t p_hi, const EstimatorSpec& spec,
                                          double noise_floor, std::int64_t* estimator_calls = nullptr);

/// Reference evaluation of the same maximum: for each p, the sample
/// covariance of p..j is rebuilt, the full-matrix estimate formed, and the
/// window LLR evaluated against it with llr_sum_expanded.
WindowStatistic reference_window_statistic(std::span<const ChannelEstimate> history,
                                           const RegularizedCov& c0, std::int64_t p_lo,
                                           std::int64_t p_hi, const EstimatorSpec& spec,
                                           std::int64_t* estimator_calls = nullptr);

// ---- Sequential (on-line) detectors ----------------------------------------

class OnlineDetector {
 public:
  virtual ~OnlineDetector() = default;

  /// Consumes the sample of the next interval. Returns the statistic at that
  /// interval, or nullopt while the detector is not yet armed.
  virtual std::optional<WindowStatistic> observe(const ChannelEstimate& h) = 0;
  /// Number of leading intervals during which no alarm is possible.
  virtual std::int64_t warmup() const = 0;
  /// Intervals consumed so far.
  virtual std::int64_t interval() const = 0;
  /// Covariance estimations performed by the most recent observe().
  virtual std::int64_t last_estimator_calls() const { return 0; }
  virtual void reset() = 0;
  virtual std::string name() const = 0;
};

/// Known pre- and post-change covariances.
class CusumDetector final : public OnlineDetector {
 public:
  CusumDetector(std::shared_ptr<const RegularizedCov> c0, std::shared_ptr<const RegularizedCov> c1);

  std::optional<WindowStatistic> observe(const ChannelEstimate& h) override;
  /// Same step fed with a precomputed LLR value.
  WindowStatistic observe_llr(double llr_value);
  std::int64_t warmup() const override { return 0; }
  std::int64_t interval() const override { return state_.j; }
  void reset() override { state_ = {}; }
  std::string name() const override { return "cusum"; }
  const CusumState& state() const { return state_; }

 private:
  std::shared_ptr<const RegularizedCov> c0_, c1_;
  CusumState state_;
};

/// Full-history GLR, p in [1, j]. Evaluated with the reference double loop;
/// no statistic is produced for j <= warmup.
class GlrDetector final : public OnlineDetector {
 public:
  GlrDetector(std::shared_ptr<const RegularizedCov> c0, EstimatorSpec estimator,
              std::int64_t warmup = 0);

  std::optional<WindowStatistic> observe(const ChannelEstimate& h) override;
  std::int64_t warmup() const override { return warmup_; }
  std::int64_t interval() const override { return static_cast<std::int64_t>(history_.size()); }
  std::int64_t last_estimator_calls() const override { return last_calls_; }
  void reset() override;
  std::string name() const override { return "glr"; }

 private:
  std::shared_ptr<const RegularizedCov> c0_;
  EstimatorSpec estimator_;
  std::int64_t warmup_;
  std::vector<ChannelEstimate> history_;
  std::int64_t last_calls_ = 0;
};

/// Window-limited GLR, p in [j - xi, j - xi_bar] for j > xi. Keeps only the
/// last xi + 1 samples.
class WlGlrDetector final : public OnlineDetector {
 public:
  WlGlrDetector(std::shared_ptr<const RegularizedCov> c0, WlGlrConfig cfg);

  std::optional<WindowStatistic> observe(const ChannelEstimate& h) override;
  std::int64_t warmup() const override { return cfg_.xi; }
  std::int64_t interval() const override { return j_; }
  std::int64_t last_estimator_calls() const override { return last_calls_; }
  void reset() override;
  std::string name() const override { return "wlglr"; }

 private:
  std::shared_ptr<const RegularizedCov> c0_;
  WlGlrConfig cfg_;
  std::int64_t j_ = 0;
  // Last xi + 1 samples and their log p0, oldest first.
  std::vector<ChannelEstimate> window_;
  std::vector<double> window_loglik_;
  std::int64_t last_calls_ = 0;
};

/// Does nothing; the timing baseline.
class NoopDetector final : public OnlineDetector {
 public:
  std::optional<WindowStatistic> observe(const ChannelEstimate&) override {
    ++j_;
    return std::nullopt;
  }
  std::int64_t warmup() const override { return 0; }
  std::int64_t interval() const override { return j_; }
  void reset() override { j_ = 0; }
  std::string name() const override { return "noop"; }

 private:
  std::int64_t j_ = 0;
};

/// Feeds `stream` (interval 1 first) until the statistic exceeds theta.
DetectorVerdict run_online(OnlineDetector& detector, std::span<const ChannelEstimate> stream,
                           double theta, Trace* trace = nullptr);

// ---- Batch entry points ----------------------------------------------------

/// CUSUM on a precomputed LLR sequence.
DetectorVerdict cusum_detect_llr(std::span<const double> llrs, double theta, Trace* trace = nullptr);

DetectorVerdict cusum_detect(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                             const RegularizedCov& c1, double theta, Trace* trace = nullptr);

DetectorVerdict glr_detect(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                           const MlBounds& bounds, double theta, Trace* trace = nullptr);

DetectorVerdict wl_glr_detect(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                              const WlGlrConfig& cfg, Trace* trace = nullptr);

/// Statistic of the off-line detector over one covariance interval of
/// exactly block_len samples: max over p in [1, block_len].
WindowStatistic offline_statistic(std::span<const ChannelEstimate> block, const RegularizedCov& c0,
                                  const OfflineConfig& cfg, std::int64_t* estimator_calls = nullptr);

/// Single decision at j = block_len. Throws DimensionError on a length
/// mismatch.
DetectorVerdict offline_detect(std::span<const ChannelEstimate> block, const RegularizedCov& c0,
                               const OfflineConfig& cfg);

}  // namespace covchange
