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

#include "covchange/onering.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace covchange {

namespace {

constexpr double kQuadratureTolerance = 1e-9;
constexpr double kPsdTolerance = 1e-9;
constexpr int kMaxQuadratureNodes = 1 << 22;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

// Integral value for every (tx lag, rx lag) pair; lags run over
// [-(M_t-1), M_t-1] x [-(M_r-1), M_r-1], stored row-major by tx lag.
class LagTable {
 public:
  LagTable(const OneRingParams& p, int nodes)
      : tx_span_(2 * p.tx_antennas - 1), rx_span_(2 * p.rx_antennas - 1),
        tx_offset_(p.tx_antennas - 1), rx_offset_(p.rx_antennas - 1),
        values_(static_cast<std::size_t>(tx_span_) * rx_span_) {
    const double aod = deg2rad(p.aod_deg);
    const double spread = deg2rad(p.spread_deg);
    const double alpha = p.wavelength_m;
    const double wavenumber = 2.0 * std::numbers::pi / alpha;
    const double spacing = 3.0 * alpha;
    const double sin_aod = std::sin(aod);
    const double cos_aod = std::cos(aod);

    std::vector<double> sin_e(nodes), cos_e(nodes), cos_2e(nodes);
    for (int k = 0; k < nodes; ++k) {
      const double eps = 2.0 * std::numbers::pi * k / nodes;
      sin_e[k] = std::sin(eps);
      cos_e[k] = std::cos(eps);
      cos_2e[k] = std::cos(2.0 * eps);
    }

    for (int dt = -tx_offset_; dt <= tx_offset_; ++dt) {
      for (int dr = -rx_offset_; dr <= rx_offset_; ++dr) {
        const double d_tx = spacing * dt;
        const double d_rx = spacing * dr;
        Complex acc{0.0, 0.0};
        for (int k = 0; k < nodes; ++k) {
          const double bracket =
              d_tx * sin_aod * (1.0 - spread * spread / 4.0 + spread * spread * cos_2e[k] / 4.0) +
              spread * d_tx * cos_aod * sin_e[k] + d_rx * sin_aod * sin_e[k] +
              d_rx * cos_aod * cos_e[k];
          const double phase = -wavenumber * bracket;
          acc += Complex(std::cos(phase), std::sin(phase));
        }
        at(dt, dr) = acc / static_cast<double>(nodes);
      }
    }
  }

  Complex value(int dt, int dr) const {
    return values_[static_cast<std::size_t>(dt + tx_offset_) * rx_span_ + (dr + rx_offset_)];
  }

  double max_abs_diff(const LagTable& other) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      worst = std::max(worst, std::abs(values_[i] - other.values_[i]));
    }
    return worst;
  }

 private:
  Complex& at(int dt, int dr) {
    return values_[static_cast<std::size_t>(dt + tx_offset_) * rx_span_ + (dr + rx_offset_)];
  }

  int tx_span_, rx_span_, tx_offset_, rx_offset_;
  std::vector<Complex> values_;
};

}  // namespace

void OneRingParams::validate() const {
  std::ostringstream msg;
  if (tx_antennas < 1) msg << "tx_antennas must be >= 1; ";
  if (rx_antennas < 1) msg << "rx_antennas must be >= 1; ";
  if (!(wavelength_m > 0.0)) msg << "wavelength_m must be > 0; ";
  if (quadrature_nodes < 64) msg << "quadrature_nodes must be >= 64; ";
  if (!(spread_deg > 0.0 && spread_deg < 180.0)) msg << "spread_deg must lie in (0, 180); ";
  if (!std::isfinite(aod_deg)) msg << "aod_deg must be finite; ";
  if (!msg.str().empty()) throw InvalidParameter("one-ring parameters: " + msg.str());
}

LinkBudget::LinkBudget(const LinkParams& params, int tx_antennas)
    : params_(params), tx_antennas_(tx_antennas) {
  if (tx_antennas < 1) throw InvalidParameter("link budget: tx_antennas must be >= 1");
  if (params.pilot_len < tx_antennas) {
    throw InvalidParameter("link budget: pilot_len must be >= tx_antennas for orthogonal pilots");
  }
  if (!(params.distance_km > 0.0) || !(params.bandwidth_hz > 0.0) ||
      !std::isfinite(params.tx_power_dbm) || !std::isfinite(params.noise_psd_dbm_hz)) {
    throw InvalidParameter("link budget: distance and bandwidth must be > 0, powers finite");
  }
  rho_ = dbm_to_mw(params.tx_power_dbm + pathloss_db());
  sigma2_ = dbm_to_mw(params.noise_psd_dbm_hz + 10.0 * std::log10(params.bandwidth_hz));
  e0_ = rho_ * params.pilot_len / (static_cast<double>(tx_antennas) * tx_antennas);
}

double LinkBudget::pathloss_db() const {
  return -128.1 - 37.6 * std::log10(params_.distance_km);
}

Index Scenario::dim() const {
  return std::visit(
      [](const auto& m) -> Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OneRingModel>) {
          return m.pre.dim();
        } else {
          return m.dim;
        }
      },
      model);
}

double Scenario::noise_floor() const {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OneRingModel>) {
          return LinkBudget(m.link, m.pre.tx_antennas).noise_floor();
        } else {
          return m.noise_floor;
        }
      },
      model);
}

void Scenario::validate() const {
  if (change_point && *change_point < 1) throw InvalidParameter("change_point must be >= 1 or never");
  if (horizon < 1) throw InvalidParameter("horizon must be >= 1");
  if (const auto* ring = std::get_if<OneRingModel>(&model)) {
    ring->pre.validate();
    ring->pre.with_aod(ring->pre.aod_deg + ring->delta_aod_deg).validate();
    LinkBudget(ring->link, ring->pre.tx_antennas);
  } else {
    const auto& id = std::get<ScaledIdentityModel>(model);
    if (id.dim < 1) throw InvalidParameter("scaled_identity dim must be >= 1");
    if (!(id.pre_scale >= 0.0) || !(id.post_scale >= 0.0)) {
      throw InvalidParameter("scaled_identity scales must be >= 0");
    }
    if (!(id.noise_floor > 0.0)) throw InvalidParameter("scaled_identity noise_floor must be > 0");
  }
}

HermitianMatrix onering_covariance(const OneRingParams& params) {
  params.validate();
  int nodes = params.quadrature_nodes;
  LagTable coarse(params, nodes);
  for (;;) {
    if (2 * nodes > kMaxQuadratureNodes) {
      throw ConvergenceError("one-ring quadrature did not converge within node budget");
    }
    LagTable fine(params, 2 * nodes);
    const double change = coarse.max_abs_diff(fine);
    nodes *= 2;
    coarse = std::move(fine);
    if (change < kQuadratureTolerance) break;
  }

  const Index dim = params.dim();
  const int mt = params.tx_antennas;
  CMatrix c(dim, dim);
  for (Index m1 = 0; m1 < dim; ++m1) {
    const int t1 = static_cast<int>(m1 % mt);
    const int r1 = static_cast<int>(m1 / mt);
    for (Index m2 = 0; m2 < dim; ++m2) {
      const int t2 = static_cast<int>(m2 % mt);
      const int r2 = static_cast<int>(m2 / mt);
      c(m1, m2) = coarse.value(t1 - t2, r1 - r2);
    }
  }
  HermitianMatrix cov = HermitianMatrix::symmetrize(c);

  const RVector eigs = eigenvalues_hermitian(cov);
  if (eigs[0] >= 0.0) return cov;
  if (eigs[0] < -kPsdTolerance) {
    std::ostringstream msg;
    msg << "one-ring covariance has eigenvalue " << eigs[0] << " below -" << kPsdTolerance;
    throw NotPositiveDefiniteError(msg.str());
  }
  EigenSystem sys = eig_hermitian(cov);
  RVector clipped = sys.eigenvalues.cwiseMax(0.0);
  CMatrix rebuilt = sys.eigenvectors * clipped.cast<Complex>().asDiagonal() * sys.eigenvectors.adjoint();
  return HermitianMatrix::symmetrize(rebuilt);
}

std::pair<HermitianMatrix, HermitianMatrix> scenario_covariances(const Scenario& scenario) {
  scenario.validate();
  if (const auto* ring = std::get_if<OneRingModel>(&scenario.model)) {
    HermitianMatrix pre = onering_covariance(ring->pre);
    if (!scenario.change_point || ring->delta_aod_deg == 0.0) return {pre, pre};
    HermitianMatrix post = onering_covariance(ring->pre.with_aod(ring->pre.aod_deg + ring->delta_aod_deg));
    return {std::move(pre), std::move(post)};
  }
  const auto& id = std::get<ScaledIdentityModel>(scenario.model);
  HermitianMatrix pre = HermitianMatrix::identity(id.dim, id.pre_scale);
  if (!scenario.change_point) return {pre, pre};
  return {std::move(pre), HermitianMatrix::identity(id.dim, id.post_scale)};
}

ChannelSampler::ChannelSampler(const HermitianMatrix& covariance, double noise_floor) {
  if (!(noise_floor > 0.0)) throw InvalidParameter("noise floor must be > 0");
  lower_ = CholeskyFactor(covariance.shifted(noise_floor)).lower();
}

ChannelEstimate ChannelSampler::color(const CVector& z) const {
  if (z.size() != dim()) throw DimensionError("standard normal vector length does not match dimension");
  return lower_.triangularView<Eigen::Lower>() * z;
}

ChannelEstimate ChannelSampler::draw(Rng& rng) const { return color(rng.complex_normal_vector(dim())); }

ChannelEstimate sample_estimated_channel(const HermitianMatrix& covariance, const LinkBudget& link,
                                         Rng& rng) {
  return ChannelSampler(covariance, link.noise_floor()).draw(rng);
}

StreamSource::StreamSource(std::shared_ptr<const ChannelSampler> pre,
                           std::shared_ptr<const ChannelSampler> post,
                           std::optional<std::int64_t> change_point)
    : pre_(std::move(pre)), post_(std::move(post)), change_point_(change_point) {
  if (!pre_ || !post_) throw InvalidParameter("stream source needs both samplers");
  if (pre_->dim() != post_->dim()) throw DimensionError("pre/post samplers differ in dimension");
  if (change_point_ && *change_point_ < 1) throw InvalidParameter("change_point must be >= 1");
}

ChannelEstimate StreamSource::next(Rng& rng) {
  ++interval_;
  const bool changed = change_point_ && interval_ >= *change_point_;
  return changed ? post_->draw(rng) : pre_->draw(rng);
}

std::vector<ChannelEstimate> simulate_stream(const Scenario& scenario, Rng& rng) {
  auto [pre, post] = scenario_covariances(scenario);
  const double floor = scenario.noise_floor();
  auto pre_sampler = std::make_shared<const ChannelSampler>(pre, floor);
  auto post_sampler = std::make_shared<const ChannelSampler>(post, floor);
  StreamSource source(pre_sampler, post_sampler, scenario.change_point);
  std::vector<ChannelEstimate> out;
  out.reserve(static_cast<std::size_t>(scenario.horizon));
  for (std::int64_t j = 0; j < scenario.horizon; ++j) out.push_back(source.next(rng));
  return out;
}

}  // namespace covchange
