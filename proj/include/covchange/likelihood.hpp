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
#include <span>
#include <vector>

#include "covchange/covest.hpp"
#include "covchange/hermitian.hpp"
#include "covchange/onering.hpp"
#include "covchange/rng.hpp"

namespace covchange {

/// C + floor * I with its Cholesky factor and log-determinant computed once.
/// Every density of an estimated channel is evaluated against this matrix.
class RegularizedCov {
 public:
  /// Throws InvalidParameter if floor <= 0 and NotPositiveDefiniteError if
  /// C + floor I is not positive definite.
  RegularizedCov(HermitianMatrix base, double noise_floor);

  const HermitianMatrix& base() const { return base_; }
  double noise_floor() const { return noise_floor_; }
  const HermitianMatrix& regularized() const { return regularized_; }
  const CholeskyFactor& factor() const { return factor_; }
  Index dim() const { return base_.dim(); }
  double logdet() const { return factor_.logdet(); }

 private:
  HermitianMatrix base_;
  double noise_floor_;
  HermitianMatrix regularized_;
  CholeskyFactor factor_;
};

/// log p(h | C) = -M log(pi) - log|C + floor I| - h^H (C + floor I)^{-1} h.
double log_density(const RegularizedCov& c, const ChannelEstimate& h);

/// log p(h | c1) - log p(h | c0).
double llr(const ChannelEstimate& h, const RegularizedCov& c0, const RegularizedCov& c1);

/// Sum of llr over a non-empty window, sample by sample.
double llr_sum(std::span<const ChannelEstimate> window, const RegularizedCov& c0,
               const RegularizedCov& c1);

/// The same sum through the window's sample covariance S:
///   n (-log|A1| - tr(A1^{-1} S)) - n M log(pi) - sum_l log p(h_l | c0).
double llr_sum_expanded(std::span<const ChannelEstimate> window, const RegularizedCov& c0,
                        const RegularizedCov& c1);

/// Per-interval LLR values of a stream.
struct LlrSequence {
  std::vector<double> values;
};

LlrSequence llr_sequence(std::span<const ChannelEstimate> stream, const RegularizedCov& c0,
                         const RegularizedCov& c1);

/// Log-determinant divergence of the regularized matrices,
///   -M - log|A1 A0^{-1}| + tr(A1 A0^{-1}),
/// which is also the KL divergence of CN(0, A1) from CN(0, A0).
/// Exactly zero when the regularized matrices are identical.
double ld_divergence(const RegularizedCov& c1, const RegularizedCov& c0);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double stderr = 0.0;
  std::int64_t samples = 0;
};

/// Sample mean (and standard error) of llr under draws from c1's law.
/// Needs n >= 1000.
MonteCarloEstimate kl_divergence_mc(const RegularizedCov& c1, const RegularizedCov& c0,
                                    std::int64_t n, Rng& rng);

/// Exact law of llr(h) for h ~ CN(0, A_s) with A_s = source.regularized():
///   llr = offset - sum_m d_m E_m,  E_m ~ Exp(1) iid,
/// where d are the eigenvalues of L_s^H (A1^{-1} - A0^{-1}) L_s. With known
/// covariances the LLR sequence is iid within a regime, so a CUSUM run can be
/// driven by this scalar law instead of M-dimensional channel draws.
class LlrLaw {
 public:
  LlrLaw(const RegularizedCov& source, const RegularizedCov& c0, const RegularizedCov& c1);

  double draw(Rng& rng) const {
    double acc = offset_;
    for (const double d : weights_) acc -= d * rng.exponential();
    return acc;
  }
  double offset() const { return offset_; }
  const std::vector<double>& weights() const { return weights_; }
  double mean() const;
  double variance() const;

 private:
  double offset_;
  std::vector<double> weights_;
};

}  // namespace covchange
