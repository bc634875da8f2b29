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

#include "covchange/detectors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace covchange {

namespace {

const double kLogPi = std::log(std::numbers::pi);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_range(std::size_t j, std::int64_t p_lo, std::int64_t p_hi) {
  if (j == 0) throw InvalidParameter("window statistic needs a non-empty history");
  if (p_lo < 1 || p_lo > p_hi || p_hi > static_cast<std::int64_t>(j)) {
    throw InvalidParameter("change-point range must satisfy 1 <= p_lo <= p_hi <= j");
  }
}

void validate_estimator(const EstimatorSpec& spec) {
  if (spec.kind == EstimatorKind::ml) spec.bounds.validate();
}

}  // namespace

CusumState cusum_step(const CusumState& state, double llr_value) {
  CusumState next;
  next.j = state.j + 1;
  const double w = state.w + llr_value;
  if (w > 0.0) {
    next.w = w;
    // A positive excursion starting from a reset keeps the candidate that was
    // set at the reset (j + 1 of the resetting interval).
    next.candidate_p = state.w > 0.0 ? state.candidate_p : state.j + 1;
  } else {
    next.w = 0.0;
    next.candidate_p = next.j + 1;
  }
  return next;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "j,armed,statistic,candidate_p\n";
  char buf[64];
  for (const auto& r : trace) {
    if (r.armed) {
      std::snprintf(buf, sizeof buf, "%.12g", r.statistic);
    } else {
      std::snprintf(buf, sizeof buf, "nan");
    }
    out << r.j << ',' << (r.armed ? 1 : 0) << ',' << buf << ',' << r.candidate_p << '\n';
  }
}

void WlGlrConfig::validate() const {
  if (xi_bar < 0 || xi_bar >= xi) throw InvalidParameter("wlglr: need 0 <= xi_bar < xi");
  if (!std::isfinite(theta)) throw InvalidParameter("wlglr: theta must be finite");
  validate_estimator(estimator);
}

void OfflineConfig::validate() const {
  if (block_len < 2) throw InvalidParameter("offline: block_len must be >= 2");
  if (!std::isfinite(theta)) throw InvalidParameter("offline: theta must be finite");
  validate_estimator(estimator);
}

WindowStatistic spectral_window_statistic(std::span<const ChannelEstimate> history,
                                          std::span<const double> pre_loglik, std::int64_t p_lo,
                                          std::int64_t p_hi, const EstimatorSpec& spec,
                                          double noise_floor, std::int64_t* estimator_calls) {
  const std::size_t j = history.size();
  check_range(j, p_lo, p_hi);
  if (pre_loglik.size() != j) throw DimensionError("pre_loglik must have one entry per sample");
  const Index dim = history.front().size();
  const auto jj = static_cast<std::int64_t>(j);
  const Index n_max = jj - p_lo + 1;
  const Index n_min = jj - p_hi + 1;

  const bool use_scatter = n_max >= dim;
  const Index gram_cap = std::min<Index>(n_max, dim - 1);
  CMatrix scatter;
  if (use_scatter) scatter = CMatrix::Zero(dim, dim);
  CMatrix gram;
  if (n_min < dim && gram_cap > 0) gram.resize(gram_cap, gram_cap);

  WindowStatistic best{kNegInf, p_hi};
  double pre_sum = 0.0;
  for (std::int64_t p = jj; p >= p_lo; --p) {
    const Index n = jj - p + 1;
    const ChannelEstimate& h = history[static_cast<std::size_t>(p - 1)];
    if (h.size() != dim) throw DimensionError("channel estimates differ in length");
    pre_sum += pre_loglik[static_cast<std::size_t>(p - 1)];
    if (n < dim && gram.size() > 0) {
      // Row k of the Gram matrix belongs to sample j - k.
      const Index k = n - 1;
      for (Index kp = 0; kp <= k; ++kp) {
        const Complex v = h.dot(history[j - 1 - static_cast<std::size_t>(kp)]);
        gram(k, kp) = v;
        gram(kp, k) = std::conj(v);
      }
    }
    if (use_scatter) scatter.noalias() += h * h.adjoint();
    if (p > p_hi) continue;

    const RVector spectrum = n < dim ? window_spectrum_from_gram(gram.topLeftCorner(n, n), dim)
                                     : window_spectrum_from_scatter(scatter, n);
    const double value = fitted_window_loglik(spectrum, n, spec, noise_floor) -
                         static_cast<double>(n * dim) * kLogPi - pre_sum;
    if (estimator_calls) ++*estimator_calls;
    if (value >= best.value) best = {value, p};
  }
  return best;
}

WindowStatistic reference_window_statistic(std::span<const ChannelEstimate> history,
                                           const RegularizedCov& c0, std::int64_t p_lo,
                                           std::int64_t p_hi, const EstimatorSpec& spec,
                                           std::int64_t* estimator_calls) {
  const std::size_t j = history.size();
  check_range(j, p_lo, p_hi);
  WindowStatistic best{kNegInf, p_lo};
  for (std::int64_t p = p_lo; p <= p_hi; ++p) {
    const auto window = history.subspan(static_cast<std::size_t>(p - 1));
    const SampleCovariance s = sample_covariance(window);
    const HermitianMatrix estimate = estimate_covariance(s, spec, c0.noise_floor());
    if (estimator_calls) ++*estimator_calls;
    double value = kNegInf;
    try {
      const RegularizedCov c1(estimate, c0.noise_floor());
      value = llr_sum_expanded(window, c0, c1);
    } catch (const NotPositiveDefiniteError&) {
      // An indefinite fitted model has no density; it cannot win the max.
    }
    if (value > best.value) best = {value, p};
  }
  return best;
}

// ---- CUSUM -----------------------------------------------------------------

CusumDetector::CusumDetector(std::shared_ptr<const RegularizedCov> c0,
                             std::shared_ptr<const RegularizedCov> c1)
    : c0_(std::move(c0)), c1_(std::move(c1)) {
  if (!c0_ || !c1_) throw InvalidParameter("cusum needs both covariances");
  if (c0_->dim() != c1_->dim()) throw DimensionError("cusum covariances differ in dimension");
}

WindowStatistic CusumDetector::observe_llr(double llr_value) {
  state_ = cusum_step(state_, llr_value);
  return {state_.w, state_.candidate_p};
}

std::optional<WindowStatistic> CusumDetector::observe(const ChannelEstimate& h) {
  return observe_llr(llr(h, *c0_, *c1_));
}

// ---- GLR -------------------------------------------------------------------

GlrDetector::GlrDetector(std::shared_ptr<const RegularizedCov> c0, EstimatorSpec estimator,
                         std::int64_t warmup)
    : c0_(std::move(c0)), estimator_(estimator), warmup_(warmup) {
  if (!c0_) throw InvalidParameter("glr needs the pre-change covariance");
  if (warmup_ < 0) throw InvalidParameter("glr: warmup must be >= 0");
  validate_estimator(estimator_);
}

void GlrDetector::reset() {
  history_.clear();
  last_calls_ = 0;
}

std::optional<WindowStatistic> GlrDetector::observe(const ChannelEstimate& h) {
  history_.push_back(h);
  last_calls_ = 0;
  const auto j = static_cast<std::int64_t>(history_.size());
  if (j <= warmup_) return std::nullopt;
  return reference_window_statistic(history_, *c0_, 1, j, estimator_, &last_calls_);
}

// ---- WL-GLR ----------------------------------------------------------------

WlGlrDetector::WlGlrDetector(std::shared_ptr<const RegularizedCov> c0, WlGlrConfig cfg)
    : c0_(std::move(c0)), cfg_(cfg) {
  if (!c0_) throw InvalidParameter("wlglr needs the pre-change covariance");
  cfg_.validate();
  window_.reserve(static_cast<std::size_t>(cfg_.xi + 2));
  window_loglik_.reserve(static_cast<std::size_t>(cfg_.xi + 2));
}

void WlGlrDetector::reset() {
  j_ = 0;
  window_.clear();
  window_loglik_.clear();
  last_calls_ = 0;
}

std::optional<WindowStatistic> WlGlrDetector::observe(const ChannelEstimate& h) {
  ++j_;
  last_calls_ = 0;
  window_.push_back(h);
  window_loglik_.push_back(log_density(*c0_, h));
  if (static_cast<std::int64_t>(window_.size()) > cfg_.xi + 1) {
    window_.erase(window_.begin());
    window_loglik_.erase(window_loglik_.begin());
  }
  if (j_ <= cfg_.xi) return std::nullopt;
  // Local index 1 is interval j - xi.
  const std::int64_t p_hi_local = cfg_.xi + 1 - cfg_.xi_bar;
  WindowStatistic s = spectral_window_statistic(window_, window_loglik_, 1, p_hi_local, cfg_.estimator,
                                                c0_->noise_floor(), &last_calls_);
  s.argmax_p += j_ - cfg_.xi - 1;
  return s;
}

// ---- Drivers ---------------------------------------------------------------

DetectorVerdict run_online(OnlineDetector& detector, std::span<const ChannelEstimate> stream,
                           double theta, Trace* trace) {
  DetectorVerdict verdict;
  for (const auto& h : stream) {
    const auto stat = detector.observe(h);
    const std::int64_t j = detector.interval();
    if (trace) {
      trace->push_back(stat ? TraceRecord{j, true, stat->value, stat->argmax_p}
                            : TraceRecord{j, false, std::numeric_limits<double>::quiet_NaN(), 0});
    }
    if (stat && stat->value > theta) {
      verdict = {true, j, stat->argmax_p, stat->value};
      break;
    }
  }
  return verdict;
}

DetectorVerdict cusum_detect_llr(std::span<const double> llrs, double theta, Trace* trace) {
  if (!(theta > 0.0)) throw InvalidParameter("cusum: theta must be > 0");
  CusumState state;
  for (const double v : llrs) {
    state = cusum_step(state, v);
    if (trace) trace->push_back({state.j, true, state.w, state.candidate_p});
    if (state.w > theta) return {true, state.j, state.candidate_p, state.w};
  }
  return {};
}

DetectorVerdict cusum_detect(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                             const RegularizedCov& c1, double theta, Trace* trace) {
  if (!(theta > 0.0)) throw InvalidParameter("cusum: theta must be > 0");
  CusumDetector det(std::make_shared<const RegularizedCov>(c0), std::make_shared<const RegularizedCov>(c1));
  return run_online(det, stream, theta, trace);
}

DetectorVerdict glr_detect(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                           const MlBounds& bounds, double theta, Trace* trace) {
  if (!(theta > 0.0)) throw InvalidParameter("glr: theta must be > 0");
  GlrDetector det(std::make_shared<const RegularizedCov>(c0), EstimatorSpec{EstimatorKind::ml, bounds});
  return run_online(det, stream, theta, trace);
}

DetectorVerdict wl_glr_detect(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                              const WlGlrConfig& cfg, Trace* trace) {
  WlGlrDetector det(std::make_shared<const RegularizedCov>(c0), cfg);
  return run_online(det, stream, cfg.theta, trace);
}

WindowStatistic offline_statistic(std::span<const ChannelEstimate> block, const RegularizedCov& c0,
                                  const OfflineConfig& cfg, std::int64_t* estimator_calls) {
  cfg.validate();
  if (static_cast<std::int64_t>(block.size()) != cfg.block_len) {
    throw DimensionError("offline detector needs exactly block_len samples");
  }
  std::vector<double> pre(block.size());
  for (std::size_t l = 0; l < block.size(); ++l) pre[l] = log_density(c0, block[l]);
  return spectral_window_statistic(block, pre, 1, cfg.block_len, cfg.estimator, c0.noise_floor(),
                                   estimator_calls);
}

DetectorVerdict offline_detect(std::span<const ChannelEstimate> block, const RegularizedCov& c0,
                               const OfflineConfig& cfg) {
  const WindowStatistic s = offline_statistic(block, c0, cfg);
  if (s.value > cfg.theta) return {true, cfg.block_len, s.argmax_p, s.value};
  return {false, 0, 0, s.value};
}

}  // namespace covchange
