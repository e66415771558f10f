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

#include <algorithm>

#include "siasim/errors.hpp"
#include "siasim/scheme.hpp"
#include "siasim/verifier.hpp"

using namespace siasim;

namespace {

template <Scalar S>
Scheme<S> scheme_for(int K, int M, int n, std::uint64_t seed) {
  return build_scheme(sample_channels<S>(build_params(K, M, n), seed));
}

template <Scalar S>
RankOptions options_for() {
  RankOptions o;
  o.policy = natural_policy<S>();
  return o;
}

}  // namespace

TEST_CASE("assemble_condition layout") {
  const auto s = scheme_for<Fp61>(3, 1, 1, 3);
  const auto& g = *s.generators;
  for (int k = 0; k < 3; ++k) {
    const auto m = assemble_condition(k, 0, s.bases, g);
    CHECK(m.rows() == 9);
    CHECK(m.cols() == 9);
    std::vector<Fp61> scratch;
    const auto base = s.bases.base[0].column(0, scratch);
    for (std::size_t t = 0; t < 9; ++t) CHECK(m(t, 0) == g.desired[k][0][t] * base[t]);
    for (std::size_t c = 0; c < 8; ++c) {
      const auto col = s.bases.next[0].column(c, scratch);
      for (std::size_t t = 0; t < 9; ++t) CHECK(m(t, 1 + c) == g.common[k][t] * col[t]);
    }
    // Same columns as the full matrix, since M = 1.
    CHECK(assemble_full_matrix(k, s.bases, g) == m);
  }
  CHECK_THROWS_AS(assemble_condition(0, 0, s.bases, g, 100), ResourceLimit);
  CHECK_THROWS_AS(assemble_condition(3, 0, s.bases, g), InvalidArgument);
}

TEST_CASE("condition column count equals lambda_n") {
  for (auto [K, M, n] : {std::tuple{3, 1, 1}, std::tuple{3, 1, 2}}) {
    const auto s = scheme_for<Fp61>(K, M, n, 1);
    const auto m = assemble_condition(0, 0, s.bases, *s.generators);
    CHECK(m.cols() == s.params.extension_length());
    CHECK(m.rows() == s.params.extension_length());
  }
}

TEST_CASE("rank conditions at (3,1,1) over 100 seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = scheme_for<Fp61>(3, 1, 1, seed);
    for (int k = 0; k < 3; ++k) {
      const auto rep = check_rank_conditions(k, s.bases, *s.generators, options_for<Fp61>());
      CHECK(rep.passed);
      REQUIRE(rep.subspaces.size() == 1);
      CHECK(rep.subspaces[0].rank == 9);
    }
  }
}

TEST_CASE("identity channels collapse the condition") {
  const auto params = build_params(3, 1, 1);
  const auto s = build_scheme(identity_channels<Fp61>(params, 9));
  const auto rep = check_rank_conditions(0, s.bases, *s.generators, options_for<Fp61>());
  CHECK_FALSE(rep.passed);
  CHECK(rep.subspaces[0].rank == 1);
}

TEST_CASE("full matrix is equivalent to the per-subspace conditions") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = scheme_for<Fp61>(3, 1, 2, seed);
    const auto full = assemble_full_matrix(0, s.bases, *s.generators);
    CHECK(full.rows() == 35);
    CHECK(full.cols() == 35);
    CHECK(rank(full) == 35);
    CHECK(check_rank_conditions(0, s.bases, *s.generators, options_for<Fp61>()).passed);
  }
  // Degenerate channels fail both ways.
  const auto params = build_params(3, 1, 2);
  const auto bad = build_scheme(identity_channels<Fp61>(params, 35));
  CHECK(rank(assemble_full_matrix(1, bad.bases, *bad.generators)) < 35);
  CHECK_FALSE(check_rank_conditions(1, bad.bases, *bad.generators, options_for<Fp61>()).passed);
}

TEST_CASE("full matrix block layout for M = 2") {
  // Small extension length: the layout, not the rank, is under test.
  const auto params = build_params(4, 2, 1);
  const auto s = build_scheme(sample_channels<Fp61>(params, 5, 8193));
  CHECK(s.bases.base[0].size() == 1);
  const auto full_rows = 2 * s.generators->dim;
  CHECK_THROWS_AS(assemble_full_matrix(0, s.bases, *s.generators, 1 << 20), ResourceLimit);
  CHECK(full_rows == 16386);
}

TEST_CASE("float policy agrees with the exact verdict") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = scheme_for<double>(3, 1, 2, seed);
    const auto c = scheme_for<Complex>(3, 1, 2, seed);
    for (int k = 0; k < 3; ++k) {
      CHECK(check_rank_conditions(k, r.bases, *r.generators, options_for<double>()).passed);
      CHECK(check_rank_conditions(k, c.bases, *c.generators, options_for<Complex>()).passed);
    }
  }
  RankOptions wrong;
  wrong.policy = RankPolicy::kExact;
  const auto r = scheme_for<double>(3, 1, 1, 0);
  CHECK_THROWS_AS(check_rank_conditions(0, r.bases, *r.generators, wrong), InvalidArgument);
}

TEST_CASE("dof_table") {
  const auto t42 = dof_table(4, 2, 1, 10);
  CHECK(t42.limit == Rational(8, 3));
  CHECK(to_string(t42.limit) == "8/3");
  CHECK(t42.rows[0].dof == Rational(8, 8193));
  CHECK(to_double(t42.rows[0].dof) == doctest::Approx(9.766e-4).epsilon(1e-3));
  CHECK(dof_table(5, 3, 1, 1).limit == Rational(15, 4));

  for (auto [K, M] : {std::pair{3, 1}, std::pair{4, 2}, std::pair{5, 3}}) {
    const auto table = dof_table(K, M, 1, 30);
    const int l = K * (2 * M - 1);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      const Rational ratio(boost::multiprecision::pow(BigInt(row.n + 1), static_cast<unsigned>(l)),
                           boost::multiprecision::pow(BigInt(row.n), static_cast<unsigned>(l)));
      CHECK(row.dof == Rational(K * M) / (M * ratio + 1));
      CHECK(row.dof < table.limit);
      if (i > 0) CHECK(row.dof > table.rows[i - 1].dof);
    }
  }
  CHECK_THROWS_AS(dof_table(5, 2, 1, 3), InvalidArgument);
  CHECK_THROWS_AS(dof_table(4, 2, 3, 2), InvalidArgument);
}

TEST_CASE("M = 2 condition columns repeat across streams") {
  // Counts distinct columns of [G[k][j] F_n^j | T_k F_{n+1}^0 | T_k F_{n+1}^1]
  // by exact comparison. Columns whose desired-slot exponents are all zero are
  // the same in both streams, and at n = 1 the desired column is one of them.
  const auto s = scheme_for<Fp61>(4, 2, 1, 0);
  const auto& g = *s.generators;
  const int k = 0;
  std::vector<std::vector<std::uint64_t>> columns;
  std::vector<Fp61> scratch;
  auto add = [&](const DiagonalOperator<Fp61>& coef, std::span<const Fp61> col) {
    std::vector<std::uint64_t> v(col.size());
    for (std::size_t t = 0; t < col.size(); ++t) v[t] = (coef[t] * col[t]).value();
    columns.push_back(std::move(v));
  };
  for (int j = 0; j < 2; ++j) {
    columns.clear();
    add(g.desired[k][j], s.bases.base[j].column(0, scratch));
    for (int jj = 0; jj < 2; ++jj) {
      for (std::size_t c = 0; c < s.bases.next[jj].size(); ++c) add(g.common[k], s.bases.next[jj].column(c, scratch));
    }
    REQUIRE(columns.size() == 8193);
    std::sort(columns.begin(), columns.end());
    const auto distinct = static_cast<std::size_t>(std::unique(columns.begin(), columns.end()) - columns.begin());
    CHECK(distinct == 8193 - 256 - 1);
  }
}
