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

#include "covchange/covest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace covchange {

namespace {

Index window_dim(std::span<const ChannelEstimate> window) {
  if (window.empty()) throw InvalidParameter("sample window must not be empty");
  const Index dim = window.front().size();
  if (dim < 1) throw DimensionError("channel estimates must have length >= 1");
  for (const auto& h : window) {
    if (h.size() != dim) throw DimensionError("channel estimates in a window differ in length");
  }
  return dim;
}

}  // namespace

SampleCovariance sample_covariance(std::span<const ChannelEstimate> window) {
  const Index dim = window_dim(window);
  CMatrix scatter = CMatrix::Zero(dim, dim);
  for (const auto& h : window) scatter.noalias() += h * h.adjoint();
  const auto n = static_cast<Index>(window.size());
  return {HermitianMatrix::symmetrize(scatter / static_cast<double>(n)), n};
}

void MlBounds::validate() const {
  if (!(beta_l > 0.0)) throw InvalidParameter("beta_l must be > 0");
  if (!(beta_u > beta_l)) throw InvalidParameter("beta_u must be > beta_l");
}

double ml_clipped_precision(double sample_eigenvalue, const MlBounds& bounds, double noise_floor) {
  const double lower = 1.0 / (bounds.beta_u + noise_floor);
  const double upper = 1.0 / (bounds.beta_l + noise_floor);
  if (!(sample_eigenvalue > 0.0)) return upper;
  return std::min(std::max(lower, 1.0 / sample_eigenvalue), upper);
}

HermitianMatrix ml_covariance(const SampleCovariance& s, const MlBounds& bounds, double noise_floor) {
  bounds.validate();
  if (!(noise_floor > 0.0)) throw InvalidParameter("noise floor must be > 0");
  const EigenSystem sys = eig_hermitian(s.matrix);
  RVector covariance_eigs(sys.eigenvalues.size());
  for (Index m = 0; m < covariance_eigs.size(); ++m) {
    covariance_eigs[m] = 1.0 / ml_clipped_precision(sys.eigenvalues[m], bounds, noise_floor);
  }
  CMatrix rebuilt =
      sys.eigenvectors * covariance_eigs.cast<Complex>().asDiagonal() * sys.eigenvectors.adjoint();
  rebuilt.diagonal().array() -= noise_floor;
  return HermitianMatrix::symmetrize(rebuilt);
}

double shrinkage_weight_from_traces(double trace, double trace_sq, Index dim, Index n_samples) {
  const double m = static_cast<double>(dim);
  const double numerator = -trace_sq / m + trace * trace;
  const double denominator = (static_cast<double>(n_samples) - 2.0) / m * (trace_sq - trace * trace / m);
  if (!(denominator > 0.0)) return 1.0;
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

double shrinkage_weight(const SampleCovariance& s) {
  const CMatrix& a = s.matrix.entries();
  const double trace = a.trace().real();
  // tr(S S) for Hermitian S is the squared Frobenius norm.
  const double trace_sq = (a * a).trace().real();
  return shrinkage_weight_from_traces(trace, trace_sq, a.rows(), s.n_samples);
}

HermitianMatrix shrinkage_covariance(const SampleCovariance& s, double noise_floor, double phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw InvalidParameter("shrinkage weight must lie in [0, 1]");
  const Index dim = s.matrix.dim();
  const double target = s.matrix.entries().trace().real() / static_cast<double>(dim);
  CMatrix out = (1.0 - phi) * s.matrix.entries();
  out.diagonal().array() += phi * target - noise_floor;
  return HermitianMatrix::symmetrize(out);
}

HermitianMatrix shrinkage_covariance(const SampleCovariance& s, double noise_floor) {
  return shrinkage_covariance(s, noise_floor, shrinkage_weight(s));
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ml:
      return "ml";
    case EstimatorKind::shrinkage:
      return "shrinkage";
  }
  return "?";
}

EstimatorKind estimator_from_string(std::string_view name) {
  if (name == "ml") return EstimatorKind::ml;
  if (name == "shrinkage") return EstimatorKind::shrinkage;
  throw InvalidParameter("unknown estimator '" + std::string(name) + "' (expected ml or shrinkage)");
}

HermitianMatrix estimate_covariance(const SampleCovariance& s, const EstimatorSpec& spec,
                                    double noise_floor) {
  if (spec.kind == EstimatorKind::ml) return ml_covariance(s, spec.bounds, noise_floor);
  return shrinkage_covariance(s, noise_floor);
}

RVector window_spectrum_from_scatter(const CMatrix& scatter, Index n_samples) {
  return eigenvalues_hermitian(CMatrix(scatter / static_cast<double>(n_samples)));
}

RVector window_spectrum_from_gram(const CMatrix& gram, Index dim) {
  const Index n = gram.rows();
  if (n > dim) throw DimensionError("Gram route needs n <= dim");
  const RVector nonzero = eigenvalues_hermitian(CMatrix(gram / static_cast<double>(n)));
  RVector out = RVector::Zero(dim);
  out.tail(n) = nonzero;
  std::sort(out.begin(), out.end());
  return out;
}

RVector window_spectrum(std::span<const ChannelEstimate> window) {
  const Index dim = window_dim(window);
  const auto n = static_cast<Index>(window.size());
  if (n < dim) {
    CMatrix gram(n, n);
    for (Index k = 0; k < n; ++k) {
      for (Index l = k; l < n; ++l) {
        const Complex v = window[k].dot(window[l]);  // h_k^H h_l
        gram(k, l) = v;
        gram(l, k) = std::conj(v);
      }
    }
    return window_spectrum_from_gram(gram, dim);
  }
  CMatrix scatter = CMatrix::Zero(dim, dim);
  for (const auto& h : window) scatter.noalias() += h * h.adjoint();
  return window_spectrum_from_scatter(scatter, n);
}

double fitted_window_loglik(const RVector& spectrum, Index n_samples, const EstimatorSpec& spec,
                            double noise_floor) {
  const Index dim = spectrum.size();
  double acc = 0.0;
  if (spec.kind == EstimatorKind::ml) {
    for (Index m = 0; m < dim; ++m) {
      const double lambda = std::max(spectrum[m], 0.0);
      const double a = 1.0 / ml_clipped_precision(lambda, spec.bounds, noise_floor);
      acc += -std::log(a) - lambda / a;
    }
  } else {
    const double trace = spectrum.sum();
    const double trace_sq = spectrum.squaredNorm();
    const double phi = shrinkage_weight_from_traces(trace, trace_sq, dim, n_samples);
    const double target = trace / static_cast<double>(dim);
    for (Index m = 0; m < dim; ++m) {
      const double lambda = std::max(spectrum[m], 0.0);
      const double a = (1.0 - phi) * lambda + phi * target;
      if (!(a > 0.0)) return -std::numeric_limits<double>::infinity();
      acc += -std::log(a) - lambda / a;
    }
  }
  return static_cast<double>(n_samples) * acc;
}

}  // namespace covchange
