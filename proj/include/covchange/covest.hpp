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

#include <span>
#include <string_view>

#include "covchange/hermitian.hpp"
#include "covchange/onering.hpp"

namespace covchange {

/// S = (1/n) sum_l h_l h_l^H over a window of n estimates.
struct SampleCovariance {
  HermitianMatrix matrix;
  Index n_samples;
};

/// Throws InvalidParameter on an empty window, DimensionError on ragged input.
SampleCovariance sample_covariance(std::span<const ChannelEstimate> window);

/// Eigenvalue box for the constrained ML estimate: beta_l I <= C <= beta_u I.
struct MlBounds {
  double beta_l = 0.5;
  double beta_u = 4.0;

  void validate() const;
  bool operator==(const MlBounds&) const = default;
};

/// Clipped precision eigenvalue
///   min(max(E0/(beta_u E0 + s2), 1/lambda), E0/(beta_l E0 + s2)),
/// written with floor = s2/E0 so that E0/(beta E0 + s2) = 1/(beta + floor).
/// lambda == 0 is taken as 1/lambda = +inf, which pins the result to the
/// upper clip 1/(beta_l + floor).
double ml_clipped_precision(double sample_eigenvalue, const MlBounds& bounds, double noise_floor);

/// Closed-form constrained ML covariance: eigendecompose S, clip the
/// precision spectrum, reassemble Phi diag(prec)^{-1} Phi^H - floor I.
/// Output eigenvalues lie in [beta_l, beta_u].
HermitianMatrix ml_covariance(const SampleCovariance& s, const MlBounds& bounds, double noise_floor);

/// Shrinkage weight phi* computed from explicit traces of S and S*S, clamped
/// to [0, 1]. The dispersion factor uses (n - 2)/M, i.e. (L1 - p - 1)/M for a
/// window p..L1. A non-positive denominator (n <= 2, S proportional to I)
/// yields phi = 1.
double shrinkage_weight(const SampleCovariance& s);

/// Same weight from trace statistics: trace = tr S, trace_sq = tr(S S).
double shrinkage_weight_from_traces(double trace, double trace_sq, Index dim, Index n_samples);

/// (1 - phi) S + phi tr(S)/M I - floor I with phi = shrinkage_weight(s).
/// Not clipped: the result may be indefinite, only C + floor I is used.
HermitianMatrix shrinkage_covariance(const SampleCovariance& s, double noise_floor);
HermitianMatrix shrinkage_covariance(const SampleCovariance& s, double noise_floor, double phi);

enum class EstimatorKind { ml, shrinkage };

std::string_view to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(std::string_view name);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::ml;
  MlBounds bounds;

  bool operator==(const EstimatorSpec&) const = default;
};

/// Full-matrix estimate of the post-change covariance from a window.
HermitianMatrix estimate_covariance(const SampleCovariance& s, const EstimatorSpec& spec,
                                    double noise_floor);

/// Spectrum of the window's sample covariance: all `dim` eigenvalues,
/// ascending, with the structural zeros of a rank-deficient window included.
/// Uses the n x n Gram matrix when n < dim.
RVector window_spectrum(std::span<const ChannelEstimate> window);

/// Same, given the scatter sum_l h_l h_l^H of the window (n >= dim path).
RVector window_spectrum_from_scatter(const CMatrix& scatter, Index n_samples);

/// Same, given the Gram matrix G_{kl} = h_k^H h_l of the window (n < dim path).
RVector window_spectrum_from_gram(const CMatrix& gram, Index dim);

/// n (-log|C^ + floor I| - tr((C^ + floor I)^{-1} S)) for the estimate C^
/// fitted to a window whose sample covariance has spectrum `spectrum`.
/// Both estimators share S's eigenvectors, so only eigenvalues are needed.
/// This is the fitted log-likelihood of the window minus n M log(pi).
double fitted_window_loglik(const RVector& spectrum, Index n_samples, const EstimatorSpec& spec,
                            double noise_floor);

}  // namespace covchange
