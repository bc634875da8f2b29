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

#include "covchange/rng.hpp"

namespace covchange {

namespace {

std::seed_seq make_seed_seq(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(a), hi(a), lo(b), hi(b), lo(c), hi(c)};
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  auto seq = make_seed_seq(seed, 0, 0);
  engine_.seed(seq);
}

Rng Rng::keyed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  Rng rng(seed);
  auto seq = make_seed_seq(seed, tag + 1, index);
  rng.engine_.seed(seq);
  return rng;
}

CVector Rng::complex_normal_vector(Index n) {
  CVector z(n);
  for (Index i = 0; i < n; ++i) z[i] = complex_normal();
  return z;
}

}  // namespace covchange
