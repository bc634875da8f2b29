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
#include <random>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "covchange/hermitian.hpp"

namespace covchange {

/// Seeded pseudo-random source. Streams keyed by (seed, tag, index) are
/// independent and reproducible, so every Monte Carlo trial owns its own
/// generator regardless of which worker runs it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Generator for trial `index` of the experiment stream labelled `tag`.
  static Rng keyed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  /// Exp(1), i.e. |z|^2 for z ~ CN(0, 1).
  double exponential() { return exponential_(engine_); }

  /// Circularly-symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
  Complex complex_normal() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {re * kHalfSqrt2, im * kHalfSqrt2};
  }

  /// Length-n vector of iid CN(0, 1) entries.
  CVector complex_normal_vector(Index n);

 private:
  static constexpr double kHalfSqrt2 = 0.70710678118654752440;
  // Boost's twister runs about twice as fast as libstdc++'s here.
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::exponential_distribution<double> exponential_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace covchange
