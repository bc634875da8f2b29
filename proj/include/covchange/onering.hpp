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
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "covchange/hermitian.hpp"
#include "covchange/rng.hpp"

namespace covchange {

/// One vectorized ML channel estimate h = vec(H) + n, length M = M_t * M_r.
using ChannelEstimate = CVector;

/// Geometry and angles of the one-ring spatial correlation model.
struct OneRingParams {
  int tx_antennas = 8;
  int rx_antennas = 2;
  double aod_deg = 0.0;
  double spread_deg = 30.0;
  double wavelength_m = 0.15;
  /// Starting trapezoidal node count; refined by doubling until converged.
  int quadrature_nodes = 1024;

  Index dim() const { return static_cast<Index>(tx_antennas) * rx_antennas; }
  OneRingParams with_aod(double aod) const {
    OneRingParams p = *this;
    p.aod_deg = aod;
    return p;
  }
  void validate() const;
  bool operator==(const OneRingParams&) const = default;
};

/// Physical link parameters in the units engineers quote them in.
struct LinkParams {
  double tx_power_dbm = 23.0;
  double distance_km = 0.1;
  double bandwidth_hz = 10e6;
  double noise_psd_dbm_hz = -169.0;
  int pilot_len = 8;

  bool operator==(const LinkParams&) const = default;
};

/// Derived pilot-observation quantities. rho folds the path loss into the
/// transmit power so that the spatial covariance keeps a unit diagonal.
class LinkBudget {
 public:
  /// Throws InvalidParameter when pilot_len < tx_antennas (pilots cannot be
  /// orthogonal) or any physical quantity is non-finite.
  LinkBudget(const LinkParams& params, int tx_antennas);

  const LinkParams& params() const { return params_; }
  int tx_antennas() const { return tx_antennas_; }

  /// -128.1 - 37.6 log10(d_km), in dB (negative: a loss).
  double pathloss_db() const;
  double rho() const { return rho_; }
  double sigma2() const { return sigma2_; }
  double e0() const { return e0_; }
  /// sigma^2 / E0: the estimation-noise floor added to every covariance.
  double noise_floor() const { return sigma2_ / e0_; }

 private:
  LinkParams params_;
  int tx_antennas_;
  double rho_;
  double sigma2_;
  double e0_;
};

/// Covariance pair from the one-ring model: the change shifts the AoD.
struct OneRingModel {
  OneRingParams pre;
  double delta_aod_deg = 0.0;
  LinkParams link;

  bool operator==(const OneRingModel&) const = default;
};

/// Synthetic pair pre_scale*I -> post_scale*I with an explicit noise floor.
/// Used for closed-form checks (e.g. M = 1, regularized 1 -> 2).
struct ScaledIdentityModel {
  int dim = 1;
  double pre_scale = 1.0;
  double post_scale = 1.0;
  double noise_floor = 1e-3;

  bool operator==(const ScaledIdentityModel&) const = default;
};

using CovarianceModel = std::variant<OneRingModel, ScaledIdentityModel>;

/// A full experiment description.
struct Scenario {
  std::string id = "scenario";
  CovarianceModel model = OneRingModel{};
  /// 1-based coherence interval of the change; nullopt means it never happens.
  std::optional<std::int64_t> change_point;
  std::int64_t horizon = 100;
  std::uint64_t seed = 1;

  Index dim() const;
  /// sigma^2 / E0 for one-ring models, the explicit floor otherwise.
  double noise_floor() const;
  void validate() const;
};

/// Quadrature of the one-ring integral for every antenna pair. Unit diagonal,
/// Hermitian, PSD (eigenvalues in [-1e-9, 0) are clipped to zero).
/// Throws ConvergenceError if node doubling does not settle below 1e-9, and
/// InvalidParameter for invalid params.
HermitianMatrix onering_covariance(const OneRingParams& params);

/// Pre- and post-change spatial covariances (without the noise floor).
/// With change_point == nullopt the post matrix equals the pre matrix.
std::pair<HermitianMatrix, HermitianMatrix> scenario_covariances(const Scenario& scenario);

/// Draws h ~ CN(0, C + floor * I) as L z with L the Cholesky factor of the
/// regularized covariance. The factorization is done once at construction.
class ChannelSampler {
 public:
  ChannelSampler(const HermitianMatrix& covariance, double noise_floor);

  Index dim() const { return lower_.rows(); }
  ChannelEstimate draw(Rng& rng) const;
  /// L z for a caller-provided standard complex normal vector z.
  ChannelEstimate color(const CVector& z) const;

 private:
  CMatrix lower_;
};

/// One draw of the ML channel estimate for covariance C under `link`.
ChannelEstimate sample_estimated_channel(const HermitianMatrix& covariance, const LinkBudget& link,
                                         Rng& rng);

/// Interval-by-interval source: samples with index j < change_point come from
/// the pre-change law, the rest from the post-change law.
class StreamSource {
 public:
  StreamSource(std::shared_ptr<const ChannelSampler> pre, std::shared_ptr<const ChannelSampler> post,
               std::optional<std::int64_t> change_point);

  /// Sample for the next interval (1-based index returned by interval()).
  ChannelEstimate next(Rng& rng);
  std::int64_t interval() const { return interval_; }
  std::optional<std::int64_t> change_point() const { return change_point_; }

 private:
  std::shared_ptr<const ChannelSampler> pre_;
  std::shared_ptr<const ChannelSampler> post_;
  std::optional<std::int64_t> change_point_;
  std::int64_t interval_ = 0;
};

/// `horizon` samples of the scenario's block-fading stream.
std::vector<ChannelEstimate> simulate_stream(const Scenario& scenario, Rng& rng);

}  // namespace covchange
