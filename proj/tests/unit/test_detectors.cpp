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

#include <algorithm>
#include <catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "covchange/detectors.hpp"
#include "covchange/errors.hpp"
#include "covchange/harness.hpp"
#include "covchange/likelihood.hpp"
#include "test_util.hpp"

using namespace covchange;
using namespace covchange::testing;
using Catch::Approx;

namespace {

const std::vector<double> kFig3{-0.20, -0.05, -0.05, 0.05, 0.05, -0.15, -0.25, 0.05, 0.20, 0.10};

struct Streams {
  PreparedScenario prepared;
  std::vector<ChannelEstimate> xs;
  std::vector<double> pre_loglik;
};

// n pre-change samples followed by m post-change ones.
Streams make_stream(double delta, int n, int m, std::uint64_t seed) {
  Streams s{PreparedScenario(general_scenario(delta)), {}, {}};
  Rng rng(seed);
  for (int i = 0; i < n + m; ++i) {
    s.xs.push_back(i < n ? s.prepared.pre_sampler()->draw(rng) : s.prepared.post_sampler()->draw(rng));
    s.pre_loglik.push_back(log_density(*s.prepared.c0(), s.xs.back()));
  }
  return s;
}

}  // namespace

TEST_CASE("CUSUM recursion reproduces the worked trace", "[detectors]") {
  const std::vector<double> w_expected{0, 0, 0, 0.05, 0.10, 0, 0, 0.05, 0.25, 0.35};
  CusumState st;
  std::vector<CusumState> states;
  for (double v : kFig3) {
    st = cusum_step(st, v);
    states.push_back(st);
  }
  for (std::size_t i = 0; i < kFig3.size(); ++i) CHECK(states[i].w == Approx(w_expected[i]).margin(1e-12));
  CHECK(states[4].candidate_p == 4);  // j = 5
  CHECK(states[8].candidate_p == 8);  // j = 9

  const DetectorVerdict v = cusum_detect_llr(kFig3, 0.3);
  CHECK(v.alarmed);
  CHECK(v.alarm_interval == 10);
  CHECK(v.estimated_change_point == 8);
  CHECK(v.statistic_at_alarm == Approx(0.35).margin(1e-12));
}

TEST_CASE("CUSUM floor and huge threshold", "[detectors]") {
  CHECK(cusum_step(CusumState{}, -1.0).w == 0.0);
  CHECK_FALSE(cusum_detect_llr(kFig3, 1e9).alarmed);
}

TEST_CASE("CUSUM recursion equals the brute-force max over change points", "[detectors][oracle]") {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const int len = 1 + static_cast<int>(rng.uniform() * 500);
    std::vector<double> llrs(len);
    for (auto& v : llrs) v = rng.normal() - 0.1;
    CusumState st;
    for (int j = 1; j <= len; ++j) {
      st = cusum_step(st, llrs[j - 1]);
      double best = 0.0, acc = 0.0;
      std::int64_t arg = j + 1;
      // Descending p: ">=" keeps the earliest p among ties.
      for (int p = j; p >= 1; --p) {
        acc += llrs[p - 1];
        if (acc >= best && acc > 0.0) {
          best = acc;
          arg = p;
        }
      }
      REQUIRE(std::abs(st.w - best) <= 1e-10);
      if (best > 0.0) CHECK(st.candidate_p == arg);
    }
  }
}

TEST_CASE("CUSUM stopping times are monotone in the threshold", "[detectors]") {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> llrs(300);
    for (auto& v : llrs) v = rng.normal() * 0.5;
    std::int64_t prev = 0;
    for (double theta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const auto v = cusum_detect_llr(llrs, theta);
      const std::int64_t t = v.alarmed ? v.alarm_interval : 1 << 30;
      CHECK(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("CUSUM on channel samples is the CUSUM of their LLRs", "[detectors]") {
  auto s = make_stream(1.0, 30, 30, 3);
  const auto& c0 = *s.prepared.c0();
  const auto& c1 = *s.prepared.c1();
  const auto seq = llr_sequence(s.xs, c0, c1);
  const auto a = cusum_detect(s.xs, c0, c1, 5.0);
  const auto b = cusum_detect_llr(seq.values, 5.0);
  CHECK(a.alarmed == b.alarmed);
  CHECK(a.alarm_interval == b.alarm_interval);
  CHECK(a.estimated_change_point == b.estimated_change_point);
}

TEST_CASE("spectral window kernel agrees with the reference double loop", "[detectors][oracle]") {
  auto s = make_stream(1.0, 25, 25, 4);
  for (EstimatorKind kind : {EstimatorKind::ml, EstimatorKind::shrinkage}) {
    const EstimatorSpec spec{kind, MlBounds{0.5, 4.0}};
    for (int j : {1, 7, 16, 17, 33, 50}) {
      const std::span<const ChannelEstimate> h(s.xs.data(), j);
      const std::span<const double> ll(s.pre_loglik.data(), j);
      for (auto [lo, hi] : {std::pair{1, j}, std::pair{std::max(1, j - 10), std::max(1, j - 3)}}) {
        std::int64_t calls_a = 0, calls_b = 0;
        const auto a = reference_window_statistic(h, *s.prepared.c0(), lo, hi, spec, &calls_a);
        const auto b = spectral_window_statistic(h, ll, lo, hi, spec, s.prepared.noise_floor(), &calls_b);
        CHECK(std::abs(a.value - b.value) <= 1e-7 * (1.0 + std::abs(a.value)));
        CHECK(a.argmax_p == b.argmax_p);
        CHECK(calls_a == hi - lo + 1);
        CHECK(calls_b == hi - lo + 1);
      }
    }
  }
}

TEST_CASE("WL-GLR is silent during warm-up and does fixed work afterwards", "[detectors]") {
  auto s = make_stream(1.0, 60, 0, 5);
  WlGlrConfig cfg;
  WlGlrDetector det(s.prepared.c0(), cfg);
  for (int j = 1; j <= 60; ++j) {
    const auto st = det.observe(s.xs[j - 1]);
    if (j <= cfg.xi) {
      CHECK_FALSE(st.has_value());
    } else {
      REQUIRE(st.has_value());
      CHECK(det.last_estimator_calls() == cfg.xi - cfg.xi_bar + 1);
      CHECK(st->argmax_p >= j - cfg.xi);
      CHECK(st->argmax_p <= j - cfg.xi_bar);
    }
  }
  // Warm-up exclusion holds for any threshold.
  const std::span<const ChannelEstimate> first(s.xs.data(), 40);
  CHECK_FALSE(wl_glr_detect(first, *s.prepared.c0(), WlGlrConfig{40, 15, {}, -1e9}).alarmed);
}

TEST_CASE("WL-GLR equals GLR when its window holds the unrestricted argmax", "[detectors][oracle]") {
  auto s = make_stream(1.0, 20, 15, 6);
  const EstimatorSpec spec;
  GlrDetector glr(s.prepared.c0(), spec);
  std::optional<WindowStatistic> full;
  for (const auto& x : s.xs) full = glr.observe(x);
  REQUIRE(full.has_value());
  const std::int64_t j = static_cast<std::int64_t>(s.xs.size());
  const std::int64_t arg = full->argmax_p;

  // Full-history window: xi = j - 1, xi_bar = 0.
  // Narrow window: just around the GLR argmax.
  const std::int64_t narrow_hi = std::min<std::int64_t>(j - arg, j - 1);
  for (auto [xi, xi_bar] : {std::pair<std::int64_t, std::int64_t>{j - 1, 0},
                            std::pair<std::int64_t, std::int64_t>{j - 1, std::max<std::int64_t>(0, narrow_hi - 1)}}) {
    WlGlrDetector wl(s.prepared.c0(), WlGlrConfig{xi, xi_bar, spec, 0.0});
    std::optional<WindowStatistic> last;
    for (const auto& x : s.xs) last = wl.observe(x);
    REQUIRE(last.has_value());
    CHECK(last->value == Approx(full->value).epsilon(1e-9));
    CHECK(last->argmax_p == arg);
  }
}

TEST_CASE("GLR and WL-GLR stopping times are monotone in the threshold", "[detectors]") {
  auto s = make_stream(1.0, 45, 40, 7);
  std::int64_t prev_wl = 0, prev_glr = 0;
  for (double theta : {100.0, 110.0, 120.0, 130.0}) {
    const auto wl = wl_glr_detect(s.xs, *s.prepared.c0(), WlGlrConfig{40, 15, {}, theta});
    const auto g = glr_detect(s.xs, *s.prepared.c0(), MlBounds{}, theta);
    const std::int64_t tw = wl.alarmed ? wl.alarm_interval : 1 << 30;
    const std::int64_t tg = g.alarmed ? g.alarm_interval : 1 << 30;
    CHECK(tw >= prev_wl);
    CHECK(tg >= prev_glr);
    prev_wl = tw;
    prev_glr = tg;
  }
}

TEST_CASE("GLR alarms earlier for a larger angle shift", "[detectors][oracle]") {
  // Paired trials: the same normals coloured by the 1 and 2 degree factors.
  const PreparedScenario one(general_scenario(1.0)), two(general_scenario(2.0));
  const double theta = 110.0;
  double sum1 = 0.0, sum2 = 0.0;
  int earlier = 0, later = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    Rng rng = Rng::keyed(8, 0, k);
    std::vector<ChannelEstimate> a, b;
    for (int i = 0; i < 60; ++i) {
      const CVector z = rng.complex_normal_vector(16);
      a.push_back(one.post_sampler()->color(z));
      b.push_back(two.post_sampler()->color(z));
    }
    const auto v1 = glr_detect(a, *one.c0(), MlBounds{}, theta);
    const auto v2 = glr_detect(b, *two.c0(), MlBounds{}, theta);
    const double t1 = v1.alarmed ? v1.alarm_interval : 61, t2 = v2.alarmed ? v2.alarm_interval : 61;
    sum1 += t1;
    sum2 += t2;
    earlier += t2 < t1;
    later += t2 > t1;
  }
  CHECK(sum2 < sum1);
  CHECK(earlier > later);
}

TEST_CASE("off-line statistic searches the whole block", "[detectors]") {
  auto s = make_stream(0.5, 4, 6, 9);
  for (EstimatorKind kind : {EstimatorKind::ml, EstimatorKind::shrinkage}) {
    OfflineConfig cfg{10, EstimatorSpec{kind, MlBounds{0.75, 45.0}}, 0.0};
    std::int64_t calls = 0;
    const auto st = offline_statistic(s.xs, *s.prepared.c0(), cfg, &calls);
    const auto ref = reference_window_statistic(s.xs, *s.prepared.c0(), 1, 10, cfg.estimator);
    CHECK(st.value == Approx(ref.value).epsilon(1e-9));
    CHECK(st.argmax_p == ref.argmax_p);
    CHECK(calls == 10);

    cfg.theta = st.value - 1e-6;
    const auto v = offline_detect(s.xs, *s.prepared.c0(), cfg);
    CHECK(v.alarmed);
    CHECK(v.alarm_interval == 10);
    CHECK(v.estimated_change_point == st.argmax_p);
    cfg.theta = st.value + 1e-6;
    CHECK_FALSE(offline_detect(s.xs, *s.prepared.c0(), cfg).alarmed);
  }
  OfflineConfig bad{10, {}, 0.0};
  const std::span<const ChannelEstimate> short_block(s.xs.data(), 9);
  CHECK_THROWS_AS(offline_detect(short_block, *s.prepared.c0(), bad), DimensionError);
}

TEST_CASE("detector configuration validation", "[detectors]") {
  CHECK_THROWS_AS((WlGlrConfig{10, 10, {}, 0.0}.validate()), InvalidParameter);
  CHECK_THROWS_AS((WlGlrConfig{10, -1, {}, 0.0}.validate()), InvalidParameter);
  CHECK_THROWS_AS((OfflineConfig{1, {}, 0.0}.validate()), InvalidParameter);
  CHECK_NOTHROW((WlGlrConfig{}.validate()));
}

TEST_CASE("trace records and CSV", "[detectors]") {
  Trace trace;
  cusum_detect_llr(kFig3, 1e9, &trace);
  REQUIRE(trace.size() == kFig3.size());
  CHECK(trace[4].candidate_p == 4);
  CHECK(trace[9].statistic == Approx(0.35).margin(1e-12));
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str().rfind("j,armed,statistic,candidate_p\n", 0) == 0);
}
