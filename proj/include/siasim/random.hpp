/*
 * Copyright 2026 The siasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "siasim/ring.hpp"

namespace siasim {

// Substream seed for (seed, keys...). Every random quantity in the library is
// drawn from a stream keyed by what it is, never by which worker draws it.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  auto mix = [](std::uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  for (std::uint64_t k : keys) h = mix(h ^ mix(k));
  return h;
}

using Rng = std::mt19937_64;

// Uniform on [0, 1) with 53 random bits; std distributions are not
// reproducible across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <std::uint64_t P>
ModInt<P> uniform_nonzero(Rng& rng) {
  // Rejection keeps the draw exactly uniform on {1, ..., P-1}.
  const std::uint64_t span = P - 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return ModInt<P>(1 + x % span);
  }
}

// Generic channel draw: uniform nonzero field element; real and complex
// values have magnitude uniform on [0.5, 2] with random sign or phase.
template <Scalar S>
S sample_generic(Rng& rng) {
  if constexpr (ScalarTraits<S>::kind == RingKind::kPrimeField) {
    return uniform_nonzero<ScalarTraits<S>::modulus>(rng);
  } else {
    const double magnitude = 0.5 + 1.5 * uniform01(rng);
    if constexpr (ScalarTraits<S>::kind == RingKind::kReal) {
      return (rng() >> 63) != 0 ? -magnitude : magnitude;
    } else {
      const double phase = 2.0 * std::numbers::pi * uniform01(rng);
      return std::polar(magnitude, phase);
    }
  }
}

// Unit-variance Gaussian (circular for complex) by Box-Muller on uniform01.
template <FloatScalar S>
S sample_gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  if constexpr (ScalarTraits<S>::kind == RingKind::kReal) {
    return radius * std::cos(angle);
  } else {
    return Complex(radius * std::cos(angle), radius * std::sin(angle)) / std::numbers::sqrt2;
  }
}

}  // namespace siasim
