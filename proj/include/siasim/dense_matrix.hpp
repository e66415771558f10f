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
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "siasim/errors.hpp"
#include "siasim/parallel.hpp"
#include "siasim/ring.hpp"

namespace siasim {

// Row-major rows x cols matrix.
template <Scalar S>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), entries_(rows * cols, zero<S>()) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<S> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
      throw InvalidArgument(fmt::format("{}x{} matrix needs {} entries, got {}", rows_, cols_, rows_ * cols_,
                                        entries_.size()));
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = one<S>();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  S& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const S& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<S> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
  std::span<const S> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }
  std::span<const S> entries() const { return entries_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<S> entries_;
};

enum class RankPolicy { kExact, kFloat };

constexpr std::string_view to_string(RankPolicy p) { return p == RankPolicy::kExact ? "exact" : "float"; }

struct RankOptions {
  RankPolicy policy = RankPolicy::kExact;
  // Float policy: a pivot counts only if its magnitude exceeds tau times the
  // largest entry magnitude of the input matrix.
  double tau = 1e-10;
  WorkerPool* pool = nullptr;
};

namespace detail {

// Rows below `pivot_row` get `row -= (row[col] / pivot) * pivot_row`, split
// across workers by row. Each row is touched by exactly one worker.
template <Scalar S, class Eliminate>
void eliminate_below(DenseMatrix<S>& m, std::size_t pivot_row, WorkerPool* pool, const Eliminate& eliminate) {
  const std::size_t first = pivot_row + 1;
  const std::size_t remaining = m.rows() - first;
  // Small panels are not worth a synchronization round.
  WorkerPool* effective = remaining * (m.cols()) >= (1U << 16) ? pool : nullptr;
  parallel_for(effective, remaining, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = first + b; r < first + e; ++r) eliminate(m.row(r));
  });
}

template <ExactScalar S>
std::size_t rank_exact(DenseMatrix<S>& m, WorkerPool* pool) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t pivot = rank;
    while (pivot < m.rows() && is_zero(m(pivot, col))) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != rank) std::swap_ranges(m.row(pivot).begin(), m.row(pivot).end(), m.row(rank).begin());

    const S inv = m(rank, col).inverse();
    const std::span<const S> prow = m.row(rank);
    eliminate_below(m, rank, pool, [&](std::span<S> row) {
      if (is_zero(row[col])) return;
      const S f = row[col] * inv;
      row[col] = zero<S>();
      for (std::size_t c = col + 1; c < row.size(); ++c) row[c] = S::sub_mul(row[c], f, prow[c]);
    });
    ++rank;
  }
  return rank;
}

template <FloatScalar S>
std::size_t rank_float(DenseMatrix<S>& m, double tau, WorkerPool* pool) {
  double maxmag = 0.0;
  for (const S& x : m.entries()) maxmag = std::max(maxmag, ScalarTraits<S>::magnitude(x));
  if (maxmag == 0.0) return 0;
  const double threshold = tau * maxmag;

  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t pivot = rank;
    double best = ScalarTraits<S>::magnitude(m(rank, col));
    for (std::size_t r = rank + 1; r < m.rows(); ++r) {
      const double mag = ScalarTraits<S>::magnitude(m(r, col));
      if (mag > best) {
        best = mag;
        pivot = r;
      }
    }
    if (best <= threshold) continue;
    if (pivot != rank) std::swap_ranges(m.row(pivot).begin(), m.row(pivot).end(), m.row(rank).begin());

    const S p = m(rank, col);
    const std::span<const S> prow = m.row(rank);
    eliminate_below(m, rank, pool, [&](std::span<S> row) {
      const S f = row[col] / p;
      row[col] = zero<S>();
      for (std::size_t c = col + 1; c < row.size(); ++c) row[c] -= f * prow[c];
    });
    ++rank;
  }
  return rank;
}

}  // namespace detail

/**
 * Rank by Gaussian elimination, destroying `m`.
 *
 * Exact policy: field elimination with first-nonzero pivots and modular
 * inverses; prime-field matrices only. Float policy: partial pivoting with the
 * relative threshold from RankOptions; real and complex matrices only.
 */
template <Scalar S>
std::size_t rank_in_place(DenseMatrix<S>& m, const RankOptions& options = {}) {
  if constexpr (ExactScalar<S>) {
    if (options.policy != RankPolicy::kExact) {
      throw InvalidArgument("float rank policy requested on a prime-field matrix");
    }
    return detail::rank_exact(m, options.pool);
  } else {
    if (options.policy != RankPolicy::kFloat) {
      throw InvalidArgument("exact rank policy requested on a floating-point matrix");
    }
    if (!(options.tau >= 0.0)) throw InvalidArgument("rank tolerance must be nonnegative");
    return detail::rank_float(m, options.tau, options.pool);
  }
}

template <Scalar S>
std::size_t rank(DenseMatrix<S> m, const RankOptions& options = {}) {
  return rank_in_place(m, options);
}

// Exact policy for prime fields, float policy otherwise.
template <Scalar S>
constexpr RankPolicy natural_policy() {
  return ExactScalar<S> ? RankPolicy::kExact : RankPolicy::kFloat;
}

}  // namespace siasim
