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
#include <cmath>
#include <numbers>

#include "covchange/errors.hpp"
#include "covchange/harness.hpp"
#include "covchange/likelihood.hpp"
#include "test_util.hpp"

using namespace covchange;
using namespace covchange::testing;
using Catch::Approx;

namespace {

CVector scalar(Complex v) {
  CVector h(1);
  h << v;
  return h;
}

// Dense Gaussian log density from the explicit inverse and determinant.
double dense_log_density(const CMatrix& a, const CVector& h) {
  const double m = static_cast<double>(a.rows());
  return -m * std::log(std::numbers::pi) - std::log(a.determinant().real()) -
         (h.adjoint() * a.inverse() * h)(0, 0).real();
}

}  // namespace

TEST_CASE("scalar log densities", "[likelihood]") {
  // C + reg = 1 with reg = 1e-3.
  const RegularizedCov c(HermitianMatrix::identity(1, 1.0 - 1e-3), 1e-3);
  CHECK(log_density(c, scalar(0.0)) == Approx(-std::log(std::numbers::pi)).epsilon(1e-14));
  CHECK(log_density(c, scalar(Complex(0.6, 0.8))) == Approx(-std::log(std::numbers::pi) - 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(RegularizedCov(HermitianMatrix::identity(1), 0.0), InvalidParameter);
}

TEST_CASE("log density matches the dense formula", "[likelihood][oracle]") {
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const HermitianMatrix base = random_pd(4, rng);
    const RegularizedCov c(base, 0.05);
    const CVector h = rng.complex_normal_vector(4);
    CHECK(std::abs(log_density(c, h) - dense_log_density(c.regularized().entries(), h)) <= 1e-9);
  }
}

TEST_CASE("llr scalar analytic case and identical hypotheses", "[likelihood]") {
  const double f = 1e-3;
  const RegularizedCov c0(HermitianMatrix::identity(1, 1.0 - f), f);
  const RegularizedCov c1(HermitianMatrix::identity(1, 2.0 - f), f);
  const CVector h = scalar(Complex(1.0, 1.0));  // |h|^2 = 2
  CHECK(llr(h, c0, c1) == Approx(1.0 - std::log(2.0)).epsilon(1e-12));

  Rng rng(2);
  const RegularizedCov a(random_pd(3, rng), 0.1);
  for (int i = 0; i < 10; ++i) CHECK(llr(rng.complex_normal_vector(3), a, a) == 0.0);
}

TEST_CASE("llr sums: single sample, telescoping, expanded form", "[likelihood][oracle]") {
  Rng rng(3);
  const RegularizedCov c0(random_pd(4, rng), 0.05);
  const RegularizedCov c1(random_pd(4, rng), 0.05);
  const auto xs = random_vectors(4, 20, rng);
  const std::span<const ChannelEstimate> all(xs);

  CHECK(llr_sum(all.subspan(3, 1), c0, c1) == Approx(llr(xs[3], c0, c1)).epsilon(1e-14));
  CHECK(llr_sum(all, c0, c0) == 0.0);
  const double whole = llr_sum(all, c0, c1);
  CHECK(std::abs(whole - (llr_sum(all.first(7), c0, c1) + llr_sum(all.subspan(7), c0, c1))) <= 1e-12);
  CHECK(std::abs(whole - llr_sum_expanded(all, c0, c1)) <= 1e-9);

  const auto seq = llr_sequence(all, c0, c1);
  REQUIRE(seq.values.size() == xs.size());
  double acc = 0.0;
  for (double v : seq.values) acc += v;
  CHECK(std::abs(acc - whole) <= 1e-12);
}

TEST_CASE("ld divergence analytic values and non-negativity", "[likelihood]") {
  const double f = 1e-3;
  const RegularizedCov a(HermitianMatrix::identity(2, 2.0 - f), f);
  const RegularizedCov b(HermitianMatrix::identity(2, 1.0 - f), f);
  CHECK(ld_divergence(a, b) == Approx(2.0 - 2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(ld_divergence(a, a) == 0.0);

  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const RegularizedCov x(random_pd(5, rng), 0.01), y(random_pd(5, rng), 0.01);
    CHECK(ld_divergence(x, y) >= -1e-10);
  }
}

TEST_CASE("Monte Carlo KL estimate agrees with the closed form", "[likelihood][oracle]") {
  const double f = 1e-3;
  const RegularizedCov a(HermitianMatrix::identity(1, 2.0 - f), f);
  const RegularizedCov b(HermitianMatrix::identity(1, 1.0 - f), f);
  Rng rng(5);
  const auto est = kl_divergence_mc(a, b, 1000000, rng);
  CHECK(std::abs(est.estimate - (1.0 - std::log(2.0))) <= 3.0 * est.stderr);
  const auto same = kl_divergence_mc(a, a, 1000, rng);
  CHECK(std::abs(same.estimate) <= 3.0 * same.stderr + 1e-15);
  CHECK_THROWS_AS(kl_divergence_mc(a, b, 10, rng), InvalidParameter);
}

TEST_CASE("KL identity on the one-ring pair", "[likelihood][oracle]") {
  const PreparedScenario p(general_scenario(1.0));
  Rng rng(6);
  const auto est = kl_divergence_mc(*p.c1(), *p.c0(), 1000000, rng);
  CHECK(std::abs(est.estimate - p.divergence()) <= 3.0 * est.stderr);
}

TEST_CASE("llr has negative mean before and positive mean after the change", "[likelihood]") {
  Rng rng(7);
  const RegularizedCov c0(random_pd(3, rng), 0.05), c1(random_pd(3, rng), 0.05);
  const ChannelSampler s0(c0.base(), 0.05), s1(c1.base(), 0.05);
  double m0 = 0.0, q0 = 0.0, m1 = 0.0, q1 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double a = llr(s0.draw(rng), c0, c1), b = llr(s1.draw(rng), c0, c1);
    m0 += a;
    q0 += a * a;
    m1 += b;
    q1 += b * b;
  }
  m0 /= n;
  m1 /= n;
  const double se0 = std::sqrt((q0 / n - m0 * m0) / n), se1 = std::sqrt((q1 / n - m1 * m1) / n);
  CHECK(m0 + 3.0 * se0 < 0.0);
  CHECK(m1 - 3.0 * se1 > 0.0);
  // E1[llr] is the divergence, E0[llr] minus the reverse divergence.
  CHECK(std::abs(m1 - ld_divergence(c1, c0)) < 3.0 * se1);
  CHECK(std::abs(m0 + ld_divergence(c0, c1)) < 3.0 * se0);
}

TEST_CASE("exact llr law matches the channel path", "[likelihood][oracle]") {
  Rng rng(8);
  const RegularizedCov c0(random_pd(4, rng), 0.05), c1(random_pd(4, rng), 0.05);
  const ChannelSampler s1(c1.base(), 0.05);
  const LlrLaw law(c1, c0, c1);
  CHECK(law.mean() == Approx(ld_divergence(c1, c0)).epsilon(1e-10));

  const int n = 200000;
  double ml = 0.0, ql = 0.0, mc = 0.0, qc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = law.draw(rng), b = llr(s1.draw(rng), c0, c1);
    ml += a;
    ql += a * a;
    mc += b;
    qc += b * b;
  }
  ml /= n;
  mc /= n;
  const double vl = ql / n - ml * ml, vc = qc / n - mc * mc;
  CHECK(std::abs(ml - mc) < 4.0 * std::sqrt((vl + vc) / n));
  CHECK(vl == Approx(law.variance()).epsilon(0.03));
  CHECK(vc == Approx(law.variance()).epsilon(0.03));
}
