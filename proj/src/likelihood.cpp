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

#include "covchange/likelihood.hpp"

#include <cmath>
#include <numbers>

namespace covchange {

namespace {

const double kLogPi = std::log(std::numbers::pi);

void require_same_dim(const RegularizedCov& a, const RegularizedCov& b) {
  if (a.dim() != b.dim()) throw DimensionError("covariance dimensions differ");
}

HermitianMatrix checked_shift(const HermitianMatrix& base, double floor) {
  if (!(floor > 0.0)) throw InvalidParameter("noise floor must be > 0");
  return base.shifted(floor);
}

}  // namespace

RegularizedCov::RegularizedCov(HermitianMatrix base, double noise_floor)
    : base_(std::move(base)),
      noise_floor_(noise_floor),
      regularized_(checked_shift(base_, noise_floor)),
      factor_(regularized_) {}

double log_density(const RegularizedCov& c, const ChannelEstimate& h) {
  if (h.size() != c.dim()) throw DimensionError("channel estimate length does not match covariance");
  return -static_cast<double>(c.dim()) * kLogPi - c.logdet() - c.factor().quadform_inv(h);
}

double llr(const ChannelEstimate& h, const RegularizedCov& c0, const RegularizedCov& c1) {
  require_same_dim(c0, c1);
  return log_density(c1, h) - log_density(c0, h);
}

double llr_sum(std::span<const ChannelEstimate> window, const RegularizedCov& c0,
               const RegularizedCov& c1) {
  if (window.empty()) throw InvalidParameter("llr_sum needs a non-empty window");
  double acc = 0.0;
  for (const auto& h : window) acc += llr(h, c0, c1);
  return acc;
}

double llr_sum_expanded(std::span<const ChannelEstimate> window, const RegularizedCov& c0,
                        const RegularizedCov& c1) {
  require_same_dim(c0, c1);
  const SampleCovariance s = sample_covariance(window);
  if (s.matrix.dim() != c1.dim()) throw DimensionError("window dimension does not match covariance");
  const auto n = static_cast<double>(s.n_samples);
  const double m = static_cast<double>(c1.dim());
  const double fitted = n * (-c1.logdet() - trace_product_inv(s.matrix, c1.regularized()));
  double pre = 0.0;
  for (const auto& h : window) pre += log_density(c0, h);
  return fitted - n * m * kLogPi - pre;
}

LlrSequence llr_sequence(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                         const RegularizedCov& c1) {
  LlrSequence out;
  out.values.reserve(stream.size());
  for (const auto& h : stream) out.values.push_back(llr(h, c0, c1));
  return out;
}

double ld_divergence(const RegularizedCov& c1, const RegularizedCov& c0) {
  require_same_dim(c0, c1);
  if (c1.regularized() == c0.regularized()) return 0.0;
  const double m = static_cast<double>(c1.dim());
  return -m - (c1.logdet() - c0.logdet()) + trace_product_inv(c1.regularized(), c0.regularized());
}

MonteCarloEstimate kl_divergence_mc(const RegularizedCov& c1, const RegularizedCov& c0,
                                    std::int64_t n, Rng& rng) {
  require_same_dim(c0, c1);
  if (n < 1000) throw InvalidParameter("kl_divergence_mc needs at least 1000 samples");
  const ChannelSampler sampler(c1.base(), c1.noise_floor());
  // Welford accumulation keeps the variance stable for large n.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    const double x = llr(sampler.draw(rng), c0, c1);
    const double delta = x - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (x - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n)), n};
}

LlrLaw::LlrLaw(const RegularizedCov& source, const RegularizedCov& c0, const RegularizedCov& c1)
    : offset_(c0.logdet() - c1.logdet()) {
  require_same_dim(c0, c1);
  require_same_dim(source, c0);
  const Index m = c0.dim();
  const CMatrix eye = CMatrix::Identity(m, m);
  const CMatrix q = c1.factor().solve(eye) - c0.factor().solve(eye);
  const CMatrix& l = source.factor().lower();
  const RVector d = eigenvalues_hermitian(CMatrix(l.adjoint() * q * l));
  weights_.assign(d.begin(), d.end());
}

double LlrLaw::mean() const {
  double acc = offset_;
  for (const double d : weights_) acc -= d;
  return acc;
}

double LlrLaw::variance() const {
  double acc = 0.0;
  for (const double d : weights_) acc += d * d;
  return acc;
}

}  // namespace covchange
