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

#include <doctest.h>

#include <atomic>
#include <cstring>

#include "oracles.hpp"
#include "siasim/diagonal.hpp"
#include "siasim/random.hpp"

using namespace siasim;

namespace {

template <Scalar S>
DiagonalOperator<S> random_diag(std::size_t dim, Rng& rng) {
  std::vector<S> e(dim);
  for (auto& x : e) x = sample_generic<S>(rng);
  return DiagonalOperator<S>(std::move(e));
}

template <Scalar S>
bool bitwise_equal(const DiagonalOperator<S>& a, const DiagonalOperator<S>& b) {
  return a.dim() == b.dim() && std::memcmp(a.entries().data(), b.entries().data(), a.dim() * sizeof(S)) == 0;
}

DiagonalOperator<Fp61> fp(std::initializer_list<std::uint64_t> values) {
  std::vector<Fp61> e;
  for (auto v : values) e.emplace_back(v);
  return DiagonalOperator<Fp61>(std::move(e));
}

}  // namespace

TEST_CASE("prime field arithmetic") {
  using F = ModInt<101>;
  CHECK(F(100) + F(5) == F(4));
  CHECK(F(3) - F(5) == F(99));
  CHECK(-F(0) == F(0));
  CHECK(F::from_signed(-1) == F(100));
  for (std::uint64_t v = 1; v < 101; ++v) CHECK(F(v) * F(v).inverse() == F(1));
  CHECK_THROWS_AS(F(0).inverse(), InvalidArgument);

  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Fp61 a = uniform_nonzero<kMersenne61>(rng);
    const Fp61 b = uniform_nonzero<kMersenne61>(rng);
    const Fp61 c = uniform_nonzero<kMersenne61>(rng);
    // Reference product through the generic 128-bit remainder.
    const auto wide = static_cast<unsigned __int128>(a.value()) * b.value();
    CHECK((a * b).value() == static_cast<std::uint64_t>(wide % kMersenne61));
    CHECK(Fp61::sub_mul(c, a, b) == c - a * b);
    CHECK(a * a.inverse() == Fp61(1));
  }
  CHECK(Fp61(kMersenne61 - 1) * Fp61(kMersenne61 - 1) == Fp61(1));
}

TEST_CASE("diag_compose") {
  Rng rng(1);
  const auto b = random_diag<Fp61>(4, rng);
  CHECK(diag_compose(DiagonalOperator<Fp61>::identity(4), b) == b);
  CHECK(diag_compose(fp({2, 3}), fp({5, 7})) == fp({10, 21}));
  CHECK_THROWS_AS(diag_compose(fp({1, 2}), fp({1, 2, 3})), InvalidArgument);

  SUBCASE("commutative bitwise over every ring") {
    for (int trial = 0; trial < 1000; ++trial) {
      const auto x = random_diag<double>(8, rng);
      const auto y = random_diag<double>(8, rng);
      CHECK(bitwise_equal(diag_compose(x, y), diag_compose(y, x)));
      const auto u = random_diag<Complex>(8, rng);
      const auto v = random_diag<Complex>(8, rng);
      CHECK(bitwise_equal(diag_compose(u, v), diag_compose(v, u)));
      const auto p = random_diag<Fp61>(8, rng);
      const auto q = random_diag<Fp61>(8, rng);
      CHECK(diag_compose(p, q) == diag_compose(q, p));
    }
  }

  SUBCASE("associative over the prime field") {
    for (int trial = 0; trial < 200; ++trial) {
      const auto x = random_diag<Fp61>(8, rng);
      const auto y = random_diag<Fp61>(8, rng);
      const auto z = random_diag<Fp61>(8, rng);
      CHECK(diag_compose(x, diag_compose(y, z)) == diag_compose(diag_compose(x, y), z));
    }
  }

  SUBCASE("associative to rounding over floats") {
    for (int trial = 0; trial < 200; ++trial) {
      const auto x = random_diag<Complex>(8, rng);
      const auto y = random_diag<Complex>(8, rng);
      const auto z = random_diag<Complex>(8, rng);
      const auto a = diag_compose(x, diag_compose(y, z));
      const auto b = diag_compose(diag_compose(x, y), z);
      for (std::size_t t = 0; t < 8; ++t) CHECK(std::abs(a[t] - b[t]) <= 1e-15 * std::abs(a[t]));
      const auto r = random_diag<double>(8, rng);
      const auto s = random_diag<double>(8, rng);
      const auto w = random_diag<double>(8, rng);
      const auto c = diag_compose(r, diag_compose(s, w));
      const auto d = diag_compose(diag_compose(r, s), w);
      for (std::size_t t = 0; t < 8; ++t) CHECK(std::abs(c[t] - d[t]) <= 1e-15 * std::abs(c[t]));
    }
  }
}

TEST_CASE("diag_linear") {
  Rng rng(2);
  const auto x = random_diag<double>(6, rng);
  const auto y = random_diag<double>(6, rng);
  // y∘x − x∘y cancels exactly, even in floating point.
  CHECK(diag_linear(y, x, x, y).is_zero());
  CHECK(diag_linear(DiagonalOperator<double>::identity(6), x, DiagonalOperator<double>::zeros(6), y) == x);

  const auto a = random_diag<Fp61>(16, rng);
  const auto px = random_diag<Fp61>(16, rng);
  const auto b = random_diag<Fp61>(16, rng);
  const auto py = random_diag<Fp61>(16, rng);
  const auto out = diag_linear(a, px, b, py);
  for (std::size_t t = 0; t < 16; ++t) {
    const auto lhs = static_cast<unsigned __int128>(a[t].value()) * px[t].value() % kMersenne61;
    const auto rhs = static_cast<unsigned __int128>(b[t].value()) * py[t].value() % kMersenne61;
    const auto expect = static_cast<std::uint64_t>((lhs + kMersenne61 - rhs) % kMersenne61);
    CHECK(out[t].value() == expect);
  }
  CHECK_THROWS_AS(diag_linear(a, px, b, DiagonalOperator<Fp61>::identity(3)), InvalidArgument);
}

TEST_CASE("diag_pow") {
  Rng rng(3);
  const auto a = random_diag<Fp61>(5, rng);
  CHECK(diag_pow(a, 0) == DiagonalOperator<Fp61>::identity(5));
  CHECK(diag_pow(a, 1) == a);
  CHECK(diag_pow(fp({2, 3}), 3) == fp({8, 27}));

  for (int trial = 0; trial < 100; ++trial) {
    const auto e1 = rng() % 33;
    const auto e2 = rng() % 32;
    const auto p = random_diag<Fp61>(5, rng);
    CHECK(diag_pow(p, e1 + e2) == diag_compose(diag_pow(p, e1), diag_pow(p, e2)));

    const auto r = random_diag<double>(5, rng);
    const auto lhs = diag_pow(r, e1 + e2);
    const auto rhs = diag_compose(diag_pow(r, e1), diag_pow(r, e2));
    for (std::size_t t = 0; t < 5; ++t) CHECK(std::abs(lhs[t] - rhs[t]) <= 1e-12 * std::abs(lhs[t]));

    const auto c = random_diag<Complex>(5, rng);
    const auto clhs = diag_pow(c, e1 + e2);
    const auto crhs = diag_compose(diag_pow(c, e1), diag_pow(c, e2));
    for (std::size_t t = 0; t < 5; ++t) CHECK(std::abs(clhs[t] - crhs[t]) <= 1e-12 * std::abs(clhs[t]));
  }
}

TEST_CASE("rank over the prime field") {
  Rng rng(4);
  CHECK(rank(DenseMatrix<Fp61>::identity(5)) == 5);

  auto m = oracle::random_matrix<Fp61>(6, 6, rng);
  for (std::size_t r = 0; r < 6; ++r) m(r, 4) = m(r, 1);
  CHECK(rank(m) == 5);

  CHECK(rank(DenseMatrix<Fp61>(4, 7)) == 0);

  SUBCASE("agrees with the minor-expansion oracle") {
    for (std::size_t r : {6U, 5U, 9U}) {
      const auto low = oracle::random_low_rank<Fp61>(9, 9, r, rng);
      const std::size_t got = rank(low);
      CHECK(got == r);
      // The oracle: some r x r minor is nonzero, and (below full size) every
      // (r+1) x (r+1) minor vanishes.
      CHECK(oracle::has_nonzero_minor(low, got));
      if (got < 9 && got + 1 <= 7) CHECK_FALSE(oracle::has_nonzero_minor(low, got + 1));
    }
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t rows = 1 + rng() % 5;
      const std::size_t cols = 1 + rng() % 5;
      const std::size_t r = rng() % 5;
      const auto mat = r == 0 ? DenseMatrix<Fp61>(rows, cols) : oracle::random_low_rank<Fp61>(rows, cols, r, rng);
      CHECK(rank(mat) == oracle::minor_rank(mat));
    }
    // Small modulus, where accidental cancellations actually happen.
    using F = ModInt<7>;
    for (int trial = 0; trial < 200; ++trial) {
      const auto mat = oracle::random_matrix<F>(4, 5, rng);
      CHECK(rank(mat) == oracle::minor_rank(mat));
    }
  }

  SUBCASE("invariant under permutations and row scaling") {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t r = 1 + rng() % 7;
      const auto base = oracle::random_low_rank<Fp61>(8, 7, r, rng);
      DenseMatrix<Fp61> permuted(8, 7);
      std::vector<std::size_t> rp(8), cp(7);
      std::iota(rp.begin(), rp.end(), 0);
      std::iota(cp.begin(), cp.end(), 0);
      std::shuffle(rp.begin(), rp.end(), rng);
      std::shuffle(cp.begin(), cp.end(), rng);
      for (std::size_t i = 0; i < 8; ++i) {
        const Fp61 scale = uniform_nonzero<kMersenne61>(rng);
        for (std::size_t j = 0; j < 7; ++j) permuted(i, j) = base(rp[i], cp[j]) * scale;
      }
      CHECK(rank(base) == r);
      CHECK(rank(permuted) == r);
    }
  }

  SUBCASE("policy must match the ring") {
    RankOptions opts;
    opts.policy = RankPolicy::kFloat;
    CHECK_THROWS_AS(rank(DenseMatrix<Fp61>::identity(2), opts), InvalidArgument);
    CHECK_THROWS_AS(rank(DenseMatrix<double>::identity(2)), InvalidArgument);
  }

  SUBCASE("worker pool gives the same answer") {
    WorkerPool pool(4);
    RankOptions opts;
    opts.pool = &pool;
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t r = 100 + rng() % 50;
      const auto big = oracle::random_low_rank<Fp61>(160, 170, r, rng);
      CHECK(rank(big, opts) == r);
      CHECK(rank(big) == r);
    }
  }
}

TEST_CASE("rank with the float policy") {
  Rng rng(5);
  RankOptions opts;
  opts.policy = RankPolicy::kFloat;
  CHECK(rank(DenseMatrix<double>::identity(5), opts) == 5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = 1 + rng() % 8;
    CHECK(rank(oracle::random_low_rank<double>(9, 8, r, rng), opts) == r);
    CHECK(rank(oracle::random_low_rank<Complex>(8, 9, r, rng), opts) == r);
  }
  // The threshold is relative: scaling the matrix does not change the rank.
  auto m = oracle::random_low_rank<double>(6, 6, 4, rng);
  DenseMatrix<double> scaled(6, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) scaled(i, j) = m(i, j) * 1e-30;
  }
  CHECK(rank(scaled, opts) == 4);
  CHECK(rank(DenseMatrix<double>(3, 3), opts) == 0);
  opts.tau = -1.0;
  CHECK_THROWS_AS(rank(m, opts), InvalidArgument);
}

TEST_CASE("worker pool covers the range exactly once") {
  WorkerPool pool(3);
  for (std::size_t count : {0U, 1U, 2U, 7U, 1000U}) {
    std::vector<int> hits(count, 0);
    pool.parallel_for(count, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  CHECK_THROWS_AS(pool.parallel_for(10, [](std::size_t b, std::size_t) {
    if (b > 0) throw InvalidArgument("boom");
  }),
                  InvalidArgument);
  // Still usable after an exception.
  std::atomic<int> total = 0;
  pool.parallel_for(10, [&](std::size_t b, std::size_t e) { total += static_cast<int>(e - b); });
  CHECK(total == 10);
}
