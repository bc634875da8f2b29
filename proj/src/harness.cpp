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

#include "covchange/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace covchange {

namespace {

// Stream tags for keyed trial generators.
constexpr std::uint64_t kTagFar = 1;
constexpr std::uint64_t kTagOfflineDelay = 2;
constexpr std::uint64_t kTagTiming = 7;
constexpr std::uint64_t kTagTrace = 8;
constexpr std::uint64_t kTagDelayBase = 1000;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// First-passage bookkeeping for an ascending threshold list: passages[k] is
// the armed time at which the statistic first exceeded thetas[k], 0 if never.
class Crossings {
 public:
  explicit Crossings(const std::vector<double>& thetas) : thetas_(thetas), passages_(thetas.size(), 0) {}

  /// Returns true once every threshold has been crossed.
  bool update(double value, std::int64_t t) {
    while (next_ < thetas_.size() && value > thetas_[next_]) passages_[next_++] = t;
    return next_ == thetas_.size();
  }
  std::vector<std::int64_t> take() { return std::move(passages_); }

 private:
  const std::vector<double>& thetas_;
  std::vector<std::int64_t> passages_;
  std::size_t next_ = 0;
};

std::vector<std::int64_t> online_passages(const PreparedScenario& prepared, const DetectorSpec& spec,
                                          const std::vector<double>& thetas,
                                          std::optional<std::int64_t> nu, std::int64_t cap, Rng& rng) {
  Crossings crossings(thetas);
  if (thetas.empty()) return crossings.take();
  if (spec.kind == DetectorKind::cusum && spec.llr_sampling == LlrSampling::law) {
    const LlrLaw& pre = prepared.pre_law();
    const LlrLaw& post = prepared.post_law();
    CusumState state;
    for (std::int64_t t = 1; t <= cap; ++t) {
      const double v = (nu && t >= *nu) ? post.draw(rng) : pre.draw(rng);
      state = cusum_step(state, v);
      if (crossings.update(state.w, t)) break;
    }
    return crossings.take();
  }
  auto detector = make_online_detector(spec, prepared);
  const std::int64_t warm = detector->warmup();
  std::optional<std::int64_t> change;
  if (nu) change = warm + *nu;
  StreamSource source(prepared.pre_sampler(), prepared.post_sampler(), change);
  for (;;) {
    const auto stat = detector->observe(source.next(rng));
    const std::int64_t t = source.interval() - warm;
    if (!stat) continue;
    if (crossings.update(stat->value, t) || t >= cap) break;
  }
  return crossings.take();
}

// Off-line statistic of one covariance interval whose samples from position
// `nu` on (1-based) follow the post-change law; nu == 0 means no change.
double offline_block_statistic(const PreparedScenario& prepared, const OfflineConfig& cfg,
                               std::int64_t nu, Rng& rng) {
  std::vector<ChannelEstimate> block;
  block.reserve(static_cast<std::size_t>(cfg.block_len));
  for (std::int64_t l = 1; l <= cfg.block_len; ++l) {
    const bool post = nu > 0 && l >= nu;
    block.push_back(post ? prepared.post_sampler()->draw(rng) : prepared.pre_sampler()->draw(rng));
  }
  return offline_statistic(block, *prepared.c0(), cfg).value;
}

OfflineConfig offline_config(const DetectorSpec& spec) {
  OfflineConfig cfg;
  cfg.block_len = spec.block_len;
  cfg.estimator = spec.estimator;
  return cfg;
}

struct MeanSe {
  double mean = kNaN;
  double stderr = kNaN;
};

MeanSe mean_se(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (const double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, kNaN};
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

void require_sweepable(const DetectorSpec& spec, const SweepConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (spec.kind == DetectorKind::noop) throw InvalidParameter("the noop detector cannot be swept");
  if (spec.kind == DetectorKind::cusum && !cfg.thetas.empty() && !(cfg.thetas.front() > 0.0)) {
    throw InvalidParameter("cusum thresholds must be > 0");
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

// ---- Names -----------------------------------------------------------------

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::cusum:
      return "cusum";
    case DetectorKind::glr:
      return "glr";
    case DetectorKind::wlglr:
      return "wlglr";
    case DetectorKind::offline:
      return "offline";
    case DetectorKind::noop:
      return "noop";
  }
  return "?";
}

DetectorKind detector_from_string(std::string_view name) {
  for (const auto k : {DetectorKind::cusum, DetectorKind::glr, DetectorKind::wlglr, DetectorKind::offline,
                       DetectorKind::noop}) {
    if (name == to_string(k)) return k;
  }
  throw InvalidParameter("unknown detector '" + std::string(name) +
                         "' (expected cusum, glr, wlglr, offline or noop)");
}

std::string_view to_string(LlrSampling mode) { return mode == LlrSampling::law ? "law" : "channel"; }

LlrSampling llr_sampling_from_string(std::string_view name) {
  if (name == "law") return LlrSampling::law;
  if (name == "channel") return LlrSampling::channel;
  throw InvalidParameter("unknown llr_sampling '" + std::string(name) + "' (expected law or channel)");
}

// ---- Specs -----------------------------------------------------------------

std::int64_t DetectorSpec::warmup() const {
  switch (kind) {
    case DetectorKind::glr:
      return glr_warmup;
    case DetectorKind::wlglr:
      return xi;
    default:
      return 0;
  }
}

void DetectorSpec::validate() const {
  if (estimator.kind == EstimatorKind::ml) estimator.bounds.validate();
  if (kind == DetectorKind::wlglr && (xi_bar < 0 || xi_bar >= xi)) {
    throw InvalidParameter("detector " + name() + ": need 0 <= xi_bar < xi");
  }
  if (kind == DetectorKind::glr && glr_warmup < 0) {
    throw InvalidParameter("detector " + name() + ": glr_warmup must be >= 0");
  }
  if (kind == DetectorKind::offline && block_len < 2) {
    throw InvalidParameter("detector " + name() + ": block_len must be >= 2");
  }
}

void SweepConfig::validate() const {
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (!std::isfinite(thetas[k])) throw InvalidParameter("sweep: thresholds must be finite");
    if (k > 0 && !(thetas[k] > thetas[k - 1])) {
      throw InvalidParameter("sweep: thresholds must be strictly increasing");
    }
  }
  if (trials_far < 100 || trials_delay < 100) throw InvalidParameter("sweep: trial counts must be >= 100");
  if (max_run_length < 1000) throw InvalidParameter("sweep: max_run_length must be >= 1000");
  if (nu_grid.empty()) throw InvalidParameter("sweep: nu_grid must not be empty");
  for (const auto nu : nu_grid) {
    if (nu < 1) throw InvalidParameter("sweep: nu_grid entries must be >= 1");
  }
  if (workers < 1) throw InvalidParameter("sweep: workers must be >= 1");
}

// ---- Prepared scenario -----------------------------------------------------

PreparedScenario::PreparedScenario(const Scenario& scenario) : scenario_(scenario) {
  Scenario changed = scenario;
  if (!changed.change_point) changed.change_point = 1;
  auto [pre, post] = scenario_covariances(changed);
  const double floor = scenario.noise_floor();
  c0_ = std::make_shared<const RegularizedCov>(pre, floor);
  c1_ = std::make_shared<const RegularizedCov>(post, floor);
  pre_ = std::make_shared<const ChannelSampler>(pre, floor);
  post_ = std::make_shared<const ChannelSampler>(post, floor);
  pre_law_ = std::make_shared<const LlrLaw>(*c0_, *c0_, *c1_);
  post_law_ = std::make_shared<const LlrLaw>(*c1_, *c0_, *c1_);
}

double PreparedScenario::divergence() const { return ld_divergence(*c1_, *c0_); }

std::unique_ptr<OnlineDetector> make_online_detector(const DetectorSpec& spec,
                                                     const PreparedScenario& prepared) {
  spec.validate();
  switch (spec.kind) {
    case DetectorKind::cusum:
      return std::make_unique<CusumDetector>(prepared.c0(), prepared.c1());
    case DetectorKind::glr:
      return std::make_unique<GlrDetector>(prepared.c0(), spec.estimator, spec.glr_warmup);
    case DetectorKind::wlglr: {
      WlGlrConfig cfg;
      cfg.xi = spec.xi;
      cfg.xi_bar = spec.xi_bar;
      cfg.estimator = spec.estimator;
      return std::make_unique<WlGlrDetector>(prepared.c0(), cfg);
    }
    case DetectorKind::noop:
      return std::make_unique<NoopDetector>();
    case DetectorKind::offline:
      break;
  }
  throw InvalidParameter("the off-line detector is not sequential");
}

// ---- Parallel trials -------------------------------------------------------

void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  const int threads = static_cast<int>(std::min<std::int64_t>(std::max(workers, 1), n));
  if (threads == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---- FAR -------------------------------------------------------------------

std::vector<FarEstimate> estimate_far_sweep(const PreparedScenario& prepared, const DetectorSpec& spec,
                                            const SweepConfig& cfg) {
  require_sweepable(spec, cfg);
  const auto& thetas = cfg.thetas;
  const std::size_t k_count = thetas.size();
  std::vector<FarEstimate> out(k_count);
  if (k_count == 0) return out;
  const auto n = cfg.trials_far;

  if (spec.kind == DetectorKind::offline) {
    // One decision per covariance interval: the per-decision false-alarm
    // probability P gives FAR = P / block_len per coherence interval.
    const OfflineConfig ocfg = offline_config(spec);
    std::vector<double> stats(static_cast<std::size_t>(n));
    parallel_for(n, cfg.workers, [&](std::int64_t i) {
      Rng rng = Rng::keyed(cfg.seed, kTagFar, static_cast<std::uint64_t>(i));
      stats[static_cast<std::size_t>(i)] = offline_block_statistic(prepared, ocfg, 0, rng);
    });
    const double len = static_cast<double>(spec.block_len);
    for (std::size_t k = 0; k < k_count; ++k) {
      std::int64_t alarms = 0;
      for (const double s : stats) alarms += s > thetas[k] ? 1 : 0;
      FarEstimate& e = out[k];
      e.theta = thetas[k];
      e.trials = n;
      if (alarms == 0) {
        // No alarm in n decisions: report the conservative bound 1/(n L).
        e.all_censored = true;
        e.censored = n;
        e.far = 1.0 / (static_cast<double>(n) * len);
        e.stderr = kNaN;
        e.mean_run_length = 1.0 / e.far;
        continue;
      }
      const double p = static_cast<double>(alarms) / static_cast<double>(n);
      e.far = p / len;
      e.stderr = std::sqrt(p * (1.0 - p) / static_cast<double>(n)) / len;
      e.mean_run_length = len / p;
    }
    return out;
  }

  std::vector<std::vector<std::int64_t>> passages(static_cast<std::size_t>(n));
  parallel_for(n, cfg.workers, [&](std::int64_t i) {
    Rng rng = Rng::keyed(cfg.seed, kTagFar, static_cast<std::uint64_t>(i));
    passages[static_cast<std::size_t>(i)] =
        online_passages(prepared, spec, thetas, std::nullopt, cfg.max_run_length, rng);
  });
  for (std::size_t k = 0; k < k_count; ++k) {
    std::vector<double> runs;
    runs.reserve(static_cast<std::size_t>(n));
    std::int64_t censored = 0;
    for (const auto& p : passages) {
      if (p[k] == 0) {
        ++censored;
        runs.push_back(static_cast<double>(cfg.max_run_length));
      } else {
        runs.push_back(static_cast<double>(p[k]));
      }
    }
    const MeanSe r = mean_se(runs);
    FarEstimate& e = out[k];
    e.theta = thetas[k];
    e.trials = n;
    e.censored = censored;
    e.all_censored = censored == n;
    e.mean_run_length = r.mean;
    e.far = 1.0 / r.mean;
    e.stderr = r.stderr / (r.mean * r.mean);
  }
  return out;
}

FarEstimate estimate_far(const PreparedScenario& prepared, const DetectorSpec& spec, double theta,
                         const SweepConfig& cfg) {
  SweepConfig one = cfg;
  one.thetas = {theta};
  return estimate_far_sweep(prepared, spec, one).front();
}

// ---- CADD ------------------------------------------------------------------

std::vector<CaddEstimate> estimate_cadd_sweep(const PreparedScenario& prepared,
                                              const DetectorSpec& spec, const SweepConfig& cfg) {
  require_sweepable(spec, cfg);
  const auto& thetas = cfg.thetas;
  const std::size_t k_count = thetas.size();
  std::vector<CaddEstimate> out(k_count);
  if (k_count == 0) return out;
  const auto n = cfg.trials_delay;

  if (spec.kind == DetectorKind::offline) {
    // The change point is spread evenly over the positions of the first
    // covariance interval; later intervals are entirely post-change. An alarm
    // after interval k has delay k L - nu.
    const OfflineConfig ocfg = offline_config(spec);
    const std::int64_t len = spec.block_len;
    const std::int64_t max_blocks = std::max<std::int64_t>(1, cfg.max_run_length / len);
    std::vector<std::vector<std::int64_t>> blocks(static_cast<std::size_t>(n));
    parallel_for(n, cfg.workers, [&](std::int64_t i) {
      Rng rng = Rng::keyed(cfg.seed, kTagOfflineDelay, static_cast<std::uint64_t>(i));
      const std::int64_t nu = 1 + i % len;
      Crossings crossings(thetas);
      for (std::int64_t b = 1; b <= max_blocks; ++b) {
        const double s = offline_block_statistic(prepared, ocfg, b == 1 ? nu : 1, rng);
        if (crossings.update(s, b)) break;
      }
      blocks[static_cast<std::size_t>(i)] = crossings.take();
    });
    for (std::size_t k = 0; k < k_count; ++k) {
      std::vector<double> delays;
      NuDelay nd;
      nd.nu = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t nu = 1 + i % len;
        std::int64_t b = blocks[static_cast<std::size_t>(i)][k];
        if (b == 0) {
          ++nd.censored;
          b = max_blocks;
        }
        delays.push_back(static_cast<double>(b * len - nu));
      }
      const MeanSe m = mean_se(delays);
      nd.mean = m.mean;
      nd.stderr = m.stderr;
      nd.used = n;
      out[k] = {thetas[k], m.mean, m.stderr, 0, n, {nd}, false};
    }
    return out;
  }

  const std::size_t nu_count = cfg.nu_grid.size();
  // passages[nu index][trial][theta index]
  std::vector<std::vector<std::vector<std::int64_t>>> passages(nu_count);
  for (std::size_t v = 0; v < nu_count; ++v) {
    const std::int64_t nu = cfg.nu_grid[v];
    auto& slot = passages[v];
    slot.resize(static_cast<std::size_t>(n));
    parallel_for(n, cfg.workers, [&](std::int64_t i) {
      Rng rng = Rng::keyed(cfg.seed, kTagDelayBase + static_cast<std::uint64_t>(nu),
                           static_cast<std::uint64_t>(i));
      slot[static_cast<std::size_t>(i)] =
          online_passages(prepared, spec, thetas, nu, nu + cfg.max_run_length, rng);
    });
  }

  for (std::size_t k = 0; k < k_count; ++k) {
    CaddEstimate& e = out[k];
    e.theta = thetas[k];
    e.trials = n;
    e.cadd = kNaN;
    bool have = false;
    for (std::size_t v = 0; v < nu_count; ++v) {
      const std::int64_t nu = cfg.nu_grid[v];
      NuDelay nd;
      nd.nu = nu;
      std::vector<double> delays;
      for (const auto& p : passages[v]) {
        std::int64_t t = p[k];
        if (t == 0) {
          ++nd.censored;
          t = nu + cfg.max_run_length;
        } else if (t < nu) {
          ++nd.false_alarms;
          continue;
        }
        delays.push_back(static_cast<double>(t - nu));
      }
      const MeanSe m = mean_se(delays);
      nd.mean = m.mean;
      nd.stderr = m.stderr;
      nd.used = static_cast<std::int64_t>(delays.size());
      if (nd.used == 0) {
        e.empty_conditioning = true;
      } else if (!have || nd.mean > e.cadd) {
        have = true;
        e.cadd = nd.mean;
        e.stderr = nd.stderr;
        e.worst_nu = nu;
      }
      e.per_nu.push_back(nd);
    }
  }
  return out;
}

CaddEstimate estimate_cadd(const PreparedScenario& prepared, const DetectorSpec& spec, double theta,
                           const SweepConfig& cfg) {
  SweepConfig one = cfg;
  one.thetas = {theta};
  return estimate_cadd_sweep(prepared, spec, one).front();
}

std::vector<TradeoffPoint> sweep_tradeoff(const PreparedScenario& prepared, const DetectorSpec& spec,
                                          const SweepConfig& cfg) {
  const auto far = estimate_far_sweep(prepared, spec, cfg);
  const auto cadd = estimate_cadd_sweep(prepared, spec, cfg);
  std::vector<TradeoffPoint> out;
  out.reserve(far.size());
  for (std::size_t k = 0; k < far.size(); ++k) {
    TradeoffPoint p;
    p.theta = far[k].theta;
    p.far = far[k].far;
    p.neg_log_far = -std::log(far[k].far);
    p.far_stderr = far[k].stderr;
    p.cadd = cadd[k].cadd;
    p.cadd_stderr = cadd[k].stderr;
    p.censored = far[k].censored;
    p.trials_far = far[k].trials;
    p.trials_delay = cadd[k].trials;
    p.worst_nu = cadd[k].worst_nu;
    p.all_censored = far[k].all_censored;
    out.push_back(p);
  }
  return out;
}

std::optional<double> cadd_at_neg_log_far(const std::vector<TradeoffPoint>& points, double target) {
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const auto& a = points[k];
    const auto& b = points[k + 1];
    const double lo = std::min(a.neg_log_far, b.neg_log_far);
    const double hi = std::max(a.neg_log_far, b.neg_log_far);
    if (target < lo || target > hi) continue;
    if (hi == lo) return 0.5 * (a.cadd + b.cadd);
    const double w = (target - a.neg_log_far) / (b.neg_log_far - a.neg_log_far);
    return a.cadd + w * (b.cadd - a.cadd);
  }
  if (points.size() == 1 && points.front().neg_log_far == target) return points.front().cadd;
  return std::nullopt;
}

// ---- Theorem 1 -------------------------------------------------------------

std::vector<Theorem1Row> verify_theorem1(const PreparedScenario& prepared, const SweepConfig& cfg,
                                         LlrSampling sampling) {
  DetectorSpec spec;
  spec.kind = DetectorKind::cusum;
  spec.llr_sampling = sampling;
  const double phi = prepared.divergence();
  if (!(phi > 0.0)) throw InvalidParameter("theorem 1 check needs distinct pre/post covariances");
  const auto points = sweep_tradeoff(prepared, spec, cfg);
  std::vector<Theorem1Row> rows;
  for (const auto& p : points) {
    Theorem1Row r;
    r.point = p;
    r.asymptote = 1.0 / phi;
    r.ratio = p.cadd / p.neg_log_far;
    // Delta method; d(-log FAR) = dFAR / FAR.
    const double rel_c = p.cadd_stderr / p.cadd;
    const double rel_n = (p.far_stderr / p.far) / p.neg_log_far;
    r.ratio_stderr = std::abs(r.ratio) * std::sqrt(rel_c * rel_c + rel_n * rel_n);
    rows.push_back(r);
  }
  return rows;
}

// ---- Timing ----------------------------------------------------------------

std::vector<TimingRow> time_detectors(const std::vector<DetectorSpec>& specs,
                                      const PreparedScenario& prepared, std::int64_t trials,
                                      std::int64_t horizon, std::uint64_t seed) {
  if (trials < 50) throw InvalidParameter("timing: trials must be >= 50");
  if (horizon < 1) throw InvalidParameter("timing: horizon must be >= 1");
  for (const auto& s : specs) s.validate();
  using Clock = std::chrono::steady_clock;
  std::vector<double> seconds(specs.size(), 0.0);
  std::vector<std::int64_t> intervals(specs.size(), 0), decisions(specs.size(), 0), calls(specs.size(), 0);
  std::optional<std::int64_t> change = prepared.scenario().change_point;

  for (std::int64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::keyed(seed, kTagTiming, static_cast<std::uint64_t>(trial));
    StreamSource source(prepared.pre_sampler(), prepared.post_sampler(), change);
    std::vector<ChannelEstimate> stream;
    stream.reserve(static_cast<std::size_t>(horizon));
    for (std::int64_t j = 0; j < horizon; ++j) stream.push_back(source.next(rng));

    for (std::size_t d = 0; d < specs.size(); ++d) {
      const DetectorSpec& spec = specs[d];
      if (spec.kind == DetectorKind::offline) {
        const OfflineConfig ocfg = offline_config(spec);
        const std::int64_t blocks = horizon / spec.block_len;
        const auto t0 = Clock::now();
        for (std::int64_t b = 0; b < blocks; ++b) {
          const std::span<const ChannelEstimate> block(stream.data() + b * spec.block_len,
                                                       static_cast<std::size_t>(spec.block_len));
          offline_statistic(block, *prepared.c0(), ocfg, &calls[d]);
        }
        seconds[d] += std::chrono::duration<double>(Clock::now() - t0).count();
        intervals[d] += blocks * spec.block_len;
        decisions[d] += blocks;
        continue;
      }
      auto detector = make_online_detector(spec, prepared);
      std::int64_t armed = 0;
      std::int64_t local_calls = 0;
      const auto t0 = Clock::now();
      for (const auto& h : stream) {
        if (detector->observe(h)) ++armed;
        local_calls += detector->last_estimator_calls();
      }
      seconds[d] += std::chrono::duration<double>(Clock::now() - t0).count();
      intervals[d] += horizon;
      decisions[d] += armed;
      calls[d] += local_calls;
    }
  }

  std::vector<TimingRow> rows;
  for (std::size_t d = 0; d < specs.size(); ++d) {
    TimingRow r;
    r.detector = specs[d].name();
    r.intervals = intervals[d];
    r.decisions = decisions[d];
    r.per_interval_ms = 1e3 * seconds[d] / static_cast<double>(std::max<std::int64_t>(intervals[d], 1));
    // A detector that never decides (noop) has no per-decision cost.
    const double nd = static_cast<double>(decisions[d]);
    r.per_decision_ms = decisions[d] > 0 ? 1e3 * seconds[d] / nd : std::numeric_limits<double>::quiet_NaN();
    r.estimator_calls_per_decision = decisions[d] > 0 ? static_cast<double>(calls[d]) / nd : 0.0;
    rows.push_back(r);
  }
  return rows;
}

Trace trace_detector(const PreparedScenario& prepared, const DetectorSpec& spec, std::int64_t horizon,
                     std::uint64_t seed) {
  spec.validate();
  Rng rng = Rng::keyed(seed, kTagTrace, 0);
  StreamSource source(prepared.pre_sampler(), prepared.post_sampler(), prepared.scenario().change_point);
  std::vector<ChannelEstimate> stream;
  for (std::int64_t j = 0; j < horizon; ++j) stream.push_back(source.next(rng));
  Trace trace;
  if (spec.kind == DetectorKind::offline) {
    const OfflineConfig ocfg = offline_config(spec);
    for (std::int64_t b = 0; (b + 1) * spec.block_len <= horizon; ++b) {
      const std::span<const ChannelEstimate> block(stream.data() + b * spec.block_len,
                                                   static_cast<std::size_t>(spec.block_len));
      const WindowStatistic s = offline_statistic(block, *prepared.c0(), ocfg);
      trace.push_back({(b + 1) * spec.block_len, true, s.value, b * spec.block_len + s.argmax_p});
    }
    return trace;
  }
  auto detector = make_online_detector(spec, prepared);
  for (const auto& h : stream) {
    const auto s = detector->observe(h);
    const std::int64_t j = detector->interval();
    trace.push_back(s ? TraceRecord{j, true, s->value, s->argmax_p}
                      : TraceRecord{j, false, kNaN, 0});
  }
  return trace;
}

// ---- CSV -------------------------------------------------------------------

const char* const kTradeoffCsvHeader =
    "theta,far,neg_log_far,far_stderr,cadd,cadd_stderr,censored,trials_far,trials_delay,detector,"
    "scenario_id";

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffPoint>& points,
                        const std::string& detector, const std::string& scenario_id, bool header) {
  if (header) out << kTradeoffCsvHeader << '\n';
  for (const auto& p : points) {
    out << fmt(p.theta) << ',' << fmt(p.far) << ',' << fmt(p.neg_log_far) << ',' << fmt(p.far_stderr)
        << ',' << fmt(p.cadd) << ',' << fmt(p.cadd_stderr) << ',' << p.censored << ',' << p.trials_far
        << ',' << p.trials_delay << ',' << detector << ',' << scenario_id << '\n';
  }
}

void write_theorem1_csv(std::ostream& out, const std::vector<Theorem1Row>& rows,
                        const std::string& scenario_id, bool header) {
  if (header) {
    out << "theta,far,neg_log_far,far_stderr,cadd,cadd_stderr,ratio,ratio_stderr,asymptote,censored,"
           "trials_far,trials_delay,scenario_id\n";
  }
  for (const auto& r : rows) {
    const auto& p = r.point;
    out << fmt(p.theta) << ',' << fmt(p.far) << ',' << fmt(p.neg_log_far) << ',' << fmt(p.far_stderr)
        << ',' << fmt(p.cadd) << ',' << fmt(p.cadd_stderr) << ',' << fmt(r.ratio) << ','
        << fmt(r.ratio_stderr) << ',' << fmt(r.asymptote) << ',' << p.censored << ',' << p.trials_far
        << ',' << p.trials_delay << ',' << scenario_id << '\n';
  }
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows,
                      const std::string& scenario_id, bool header) {
  if (header) {
    out << "detector,per_interval_ms,per_decision_ms,intervals,decisions,estimator_calls_per_decision,"
           "scenario_id\n";
  }
  for (const auto& r : rows) {
    out << r.detector << ',' << fmt(r.per_interval_ms) << ',' << fmt(r.per_decision_ms) << ','
        << r.intervals << ',' << r.decisions << ',' << fmt(r.estimator_calls_per_decision) << ','
        << scenario_id << '\n';
  }
}

}  // namespace covchange
