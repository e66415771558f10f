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
#include <complex>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "siasim/errors.hpp"

namespace siasim {

enum class RingKind { kReal, kComplex, kPrimeField };

constexpr std::string_view to_string(RingKind kind) {
  switch (kind) {
    case RingKind::kReal:
      return "real";
    case RingKind::kComplex:
      return "complex";
    case RingKind::kPrimeField:
      return "primefield";
  }
  return "unknown";
}

inline std::optional<RingKind> parse_ring(std::string_view name) {
  if (name == "real") return RingKind::kReal;
  if (name == "complex") return RingKind::kComplex;
  if (name == "primefield" || name == "prime-field") return RingKind::kPrimeField;
  return std::nullopt;
}

/**
 * Element of Z/pZ for a prime modulus p < 2^63.
 *
 * Values are kept fully reduced in [0, p). Products go through a 128-bit
 * intermediate; the Mersenne prime 2^61 - 1 gets a shift-and-add reduction
 * instead of a division.
 */
template <std::uint64_t Modulus>
class ModInt {
  static_assert(Modulus > 2 && Modulus < (std::uint64_t{1} << 63),
                "modulus must fit in 63 bits");

 public:
  static constexpr std::uint64_t kModulus = Modulus;

  constexpr ModInt() = default;
  constexpr explicit ModInt(std::uint64_t v) : value_(v % Modulus) {}

  static constexpr ModInt from_signed(std::int64_t v) {
    const auto m = static_cast<std::int64_t>(Modulus);
    std::int64_t r = v % m;
    if (r < 0) r += m;
    return ModInt(static_cast<std::uint64_t>(r));
  }

  constexpr std::uint64_t value() const { return value_; }

  friend constexpr ModInt operator+(ModInt a, ModInt b) {
    std::uint64_t s = a.value_ + b.value_;
    if (s >= Modulus) s -= Modulus;
    return raw(s);
  }
  friend constexpr ModInt operator-(ModInt a, ModInt b) {
    return raw(a.value_ >= b.value_ ? a.value_ - b.value_ : a.value_ + Modulus - b.value_);
  }
  friend constexpr ModInt operator-(ModInt a) { return raw(a.value_ == 0 ? 0 : Modulus - a.value_); }
  friend constexpr ModInt operator*(ModInt a, ModInt b) {
    return raw(reduce(static_cast<unsigned __int128>(a.value_) * b.value_));
  }
  constexpr ModInt& operator+=(ModInt o) { return *this = *this + o; }
  constexpr ModInt& operator-=(ModInt o) { return *this = *this - o; }
  constexpr ModInt& operator*=(ModInt o) { return *this = *this * o; }
  friend constexpr bool operator==(ModInt a, ModInt b) = default;

  // a - f*b in one reduction; the hot loop of field elimination.
  static constexpr ModInt sub_mul(ModInt a, ModInt f, ModInt b) {
    const ModInt nf = -f;
    return raw(reduce(static_cast<unsigned __int128>(nf.value_) * b.value_ + a.value_));
  }

  constexpr ModInt pow(std::uint64_t e) const {
    ModInt base = *this;
    ModInt acc(1);
    while (e != 0) {
      if (e & 1U) acc *= base;
      base *= base;
      e >>= 1U;
    }
    return acc;
  }

  ModInt inverse() const {
    if (value_ == 0) throw InvalidArgument("zero has no inverse in a prime field");
    return pow(Modulus - 2);
  }

 private:
  static constexpr ModInt raw(std::uint64_t v) {
    ModInt m;
    m.value_ = v;
    return m;
  }

  static constexpr std::uint64_t reduce(unsigned __int128 z) {
    if constexpr (Modulus == (std::uint64_t{1} << 61) - 1) {
      // z < 2^123, so both halves fit after one fold and the sum is < 2^63.
      std::uint64_t r = (static_cast<std::uint64_t>(z) & Modulus) + static_cast<std::uint64_t>(z >> 61);
      r = (r & Modulus) + (r >> 61);
      return r >= Modulus ? r - Modulus : r;
    } else {
      return static_cast<std::uint64_t>(z % Modulus);
    }
  }

  std::uint64_t value_ = 0;
};

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;
using Fp61 = ModInt<kMersenne61>;
using Complex = std::complex<double>;

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr RingKind kind = RingKind::kReal;
  static constexpr bool exact = false;
  static double magnitude(double x) { return std::abs(x); }
  static std::string format(double x) { return fmt::format("{:.17g}", x); }
};

template <>
struct ScalarTraits<Complex> {
  static constexpr RingKind kind = RingKind::kComplex;
  static constexpr bool exact = false;
  static double magnitude(Complex x) { return std::abs(x); }
  static std::string format(Complex x) { return fmt::format("{:.17g}{:+.17g}i", x.real(), x.imag()); }
};

template <std::uint64_t P>
struct ScalarTraits<ModInt<P>> {
  static constexpr RingKind kind = RingKind::kPrimeField;
  static constexpr bool exact = true;
  static constexpr std::uint64_t modulus = P;
  static std::string format(ModInt<P> x) { return std::to_string(x.value()); }
};

template <class S>
concept Scalar = requires(S a, S b) {
  { ScalarTraits<S>::kind } -> std::convertible_to<RingKind>;
  { a + b } -> std::same_as<S>;
  { a - b } -> std::same_as<S>;
  { a * b } -> std::same_as<S>;
  { -a } -> std::same_as<S>;
};

template <class S>
concept ExactScalar = Scalar<S> && ScalarTraits<S>::exact;

template <class S>
concept FloatScalar = Scalar<S> && !ScalarTraits<S>::exact;

template <Scalar S>
constexpr S zero() {
  return S(0);
}

template <Scalar S>
constexpr S one() {
  return S(1);
}

template <Scalar S>
constexpr bool is_zero(const S& x) {
  return x == S(0);
}

}  // namespace siasim
