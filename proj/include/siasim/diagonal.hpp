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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "siasim/errors.hpp"
#include "siasim/ring.hpp"

namespace siasim {

/**
 * A dim x dim diagonal matrix stored as its diagonal.
 *
 * One channel use of the symbol-extended channel is one diagonal position, so
 * every channel coefficient and every quantity derived from it lives here.
 * The operators form a commutative ring under entrywise +, -, * and all
 * binary operations require equal dimensions.
 */
template <Scalar S>
class DiagonalOperator {
 public:
  DiagonalOperator() = default;
  explicit DiagonalOperator(std::vector<S> entries) : entries_(std::move(entries)) {}
  DiagonalOperator(std::size_t dim, S fill) : entries_(dim, fill) {}

  static DiagonalOperator identity(std::size_t dim) { return DiagonalOperator(dim, one<S>()); }
  static DiagonalOperator zeros(std::size_t dim) { return DiagonalOperator(dim, zero<S>()); }

  std::size_t dim() const { return entries_.size(); }
  std::span<const S> entries() const { return entries_; }
  std::span<S> entries() { return entries_; }
  const S& operator[](std::size_t t) const { return entries_[t]; }
  S& operator[](std::size_t t) { return entries_[t]; }

  bool is_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const S& x) { return siasim::is_zero(x); });
  }
  bool has_zero_entry() const {
    return std::any_of(entries_.begin(), entries_.end(), [](const S& x) { return siasim::is_zero(x); });
  }

  friend bool operator==(const DiagonalOperator&, const DiagonalOperator&) = default;

 private:
  std::vector<S> entries_;
};

namespace detail {
inline void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument(fmt::format("diagonal dimension mismatch: {} vs {}", a, b));
}
}  // namespace detail

template <Scalar S>
DiagonalOperator<S> diag_compose(const DiagonalOperator<S>& a, const DiagonalOperator<S>& b) {
  detail::require_same_dim(a.dim(), b.dim());
  std::vector<S> out(a.dim());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = a[t] * b[t];
  return DiagonalOperator<S>(std::move(out));
}

// alpha∘x − beta∘y
template <Scalar S>
DiagonalOperator<S> diag_linear(const DiagonalOperator<S>& alpha, const DiagonalOperator<S>& x,
                                const DiagonalOperator<S>& beta, const DiagonalOperator<S>& y) {
  detail::require_same_dim(alpha.dim(), x.dim());
  detail::require_same_dim(alpha.dim(), beta.dim());
  detail::require_same_dim(alpha.dim(), y.dim());
  std::vector<S> out(x.dim());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = alpha[t] * x[t] - beta[t] * y[t];
  return DiagonalOperator<S>(std::move(out));
}

template <Scalar S>
S scalar_pow(S base, std::uint64_t e) {
  S acc = one<S>();
  while (e != 0) {
    if (e & 1U) acc = acc * base;
    base = base * base;
    e >>= 1U;
  }
  return acc;
}

template <Scalar S>
DiagonalOperator<S> diag_pow(const DiagonalOperator<S>& a, std::uint64_t e) {
  std::vector<S> out(a.dim());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = scalar_pow(a[t], e);
  return DiagonalOperator<S>(std::move(out));
}

template <Scalar S>
DiagonalOperator<S> operator*(const DiagonalOperator<S>& a, const DiagonalOperator<S>& b) {
  return diag_compose(a, b);
}

template <Scalar S>
DiagonalOperator<S> operator+(const DiagonalOperator<S>& a, const DiagonalOperator<S>& b) {
  detail::require_same_dim(a.dim(), b.dim());
  std::vector<S> out(a.dim());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = a[t] + b[t];
  return DiagonalOperator<S>(std::move(out));
}

template <Scalar S>
DiagonalOperator<S> operator-(const DiagonalOperator<S>& a, const DiagonalOperator<S>& b) {
  detail::require_same_dim(a.dim(), b.dim());
  std::vector<S> out(a.dim());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = a[t] - b[t];
  return DiagonalOperator<S>(std::move(out));
}

template <Scalar S>
DiagonalOperator<S> operator-(const DiagonalOperator<S>& a) {
  std::vector<S> out(a.dim());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = -a[t];
  return DiagonalOperator<S>(std::move(out));
}

// Largest entry magnitude; floats only.
template <FloatScalar S>
double max_magnitude(const DiagonalOperator<S>& a) {
  double m = 0.0;
  for (const S& x : a.entries()) m = std::max(m, ScalarTraits<S>::magnitude(x));
  return m;
}

}  // namespace siasim
