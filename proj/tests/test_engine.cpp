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

#include "siasim/engine.hpp"
#include "siasim/errors.hpp"

using namespace siasim;

namespace {

template <Scalar S>
ChannelSet<S> channels_for(int M, std::uint64_t seed, std::size_t dim = 7) {
  return sample_channels<S>(build_params(M + 2, M, 1), seed, dim);
}

}  // namespace

TEST_CASE("stack_decoder relabels channel links") {
  SUBCASE("M = 1") {
    const auto ch = channels_for<Fp61>(1, 1);
    const auto st = stack_decoder(ch, 0);
    CHECK(st.receivers == std::vector<int>{0});
    CHECK(st.interferer_order == std::vector<int>{2, 1});
    CHECK(st.C(0, 0) == ch(0, 2));
    CHECK(st.g(0) == ch(0, 0));
    CHECK(st.r(0) == ch(0, 1));
  }
  SUBCASE("M = 3, five users") {
    const auto ch = channels_for<Fp61>(3, 2);
    for (int k = 0; k < 5; ++k) {
      const auto st = stack_decoder(ch, k);
      CHECK(st.receivers == std::vector<int>{k, (k + 1) % 5, (k + 2) % 5});
      CHECK(st.interferer_order == std::vector<int>{(k + 4) % 5, (k + 1) % 5, (k + 2) % 5, (k + 3) % 5});
      for (int m = 0; m < 3; ++m) {
        for (int i = 0; i < 3; ++i) CHECK(st.C(m, i) == ch(st.receivers[m], st.interferer_order[i]));
        CHECK(st.g(m) == ch(st.receivers[m], k));
        CHECK(st.r(m) == ch(st.receivers[m], st.interferer_order[3]));
      }
    }
  }
  CHECK_THROWS_AS(stack_decoder(channels_for<Fp61>(2, 1), 4), InvalidArgument);
}

TEST_CASE("first step of the five-user example") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ch = channels_for<Fp61>(3, seed);
    const int k = static_cast<int>(seed % 5);
    auto H = [&](int rx, int tx) { return ch(wrap_index(rx, 5), wrap_index(tx, 5)); };
    const auto st = stack_decoder(ch, k);
    const auto one = sia_step(st, 1);

    // Zero blocks: X_{k-1} leaves subspace 2, X_{k+1} subspace 3, X_{k+2}
    // subspace 1 (1-based numbering).
    CHECK(one.C(1, 0).is_zero());
    CHECK(one.C(2, 1).is_zero());
    CHECK(one.C(0, 2).is_zero());
    for (auto [m, i] : {std::pair{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 0}}) CHECK_FALSE(one.C(m, i).is_zero());

    // Desired coefficients, up to the sign of the combination convention.
    const auto g0 = H(k, k + 2) * H(k + 2, k) - H(k, k) * H(k + 2, k + 2);
    const auto g1 = H(k + 1, k - 1) * H(k, k) - H(k, k - 1) * H(k + 1, k);
    const auto g2 = H(k + 2, k + 1) * H(k + 1, k) - H(k + 1, k + 1) * H(k + 2, k);
    CHECK(one.g(0) == -g0);
    CHECK(one.g(1) == -g1);
    CHECK(one.g(2) == -g2);

    // The step transform is the negated left-multiplication matrix of the
    // worked example.
    const auto T = sia_step_transform(st, 1);
    const auto z = DiagonalOperator<Fp61>::zeros(7);
    const BlockMatrix<Fp61> example = {
        {-H(k + 2, k + 2), z, H(k, k + 2)},
        {H(k + 1, k - 1), -H(k, k - 1), z},
        {z, H(k + 2, k + 1), -H(k + 1, k + 1)},
    };
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) CHECK(T[r][c] == -example[r][c]);
    }
  }
}

TEST_CASE("sia_step argument checks") {
  const auto st = stack_decoder(channels_for<Fp61>(3, 1), 0);
  CHECK_THROWS_AS(sia_step(st, 0), InvalidArgument);
  CHECK_THROWS_AS(sia_step(st, 3), InvalidArgument);
  CHECK_THROWS_AS(sia_step(st, 2), InvalidArgument);  // step 1 not applied yet
  CHECK_THROWS_AS(sia_run(sia_step(st, 1)), InvalidArgument);
  const auto single = stack_decoder(channels_for<Fp61>(1, 1), 0);
  CHECK_THROWS_AS(sia_step(single, 1), InvalidArgument);
}

TEST_CASE("sia_run reaches the processed form") {
  SUBCASE("M = 1 is the identity") {
    const auto st = stack_decoder(channels_for<Fp61>(1, 3), 1);
    const auto out = sia_run(st);
    CHECK(out.step_count == 0);
    CHECK(out.Tk == st.C(0, 0));
    CHECK(out.state.g(0) == st.g(0));
    CHECK(out.state.r(0) == st.r(0));
  }

  SUBCASE("M = 2 common coefficient is the 2x2 determinant") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto st = stack_decoder(channels_for<Fp61>(2, seed), static_cast<int>(seed % 4));
      const auto out = sia_run(st);
      CHECK(out.Tk == st.C(0, 0) * st.C(1, 1) - st.C(0, 1) * st.C(1, 0));
      CHECK(out.step_count == 1);
    }
  }

  SUBCASE("zero structure and common diagonal for M up to 6") {
    for (int M = 1; M <= 6; ++M) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto ch = channels_for<Fp61>(M, seed);
        const auto st = stack_decoder(ch, static_cast<int>(seed % (M + 2)));
        const auto out = sia_run(st);
        CHECK(out.step_count == M - 1);
        for (int m = 0; m < M; ++m) {
          for (int i = 0; i < M; ++i) {
            if (i == m) {
              CHECK(out.state.C(m, i) == out.Tk);
            } else {
              CHECK(out.state.C(m, i).is_zero());
            }
          }
        }
        CHECK_FALSE(out.Tk.has_zero_entry());
      }
    }
  }

  SUBCASE("combiner reproduces every processed row from the raw rows") {
    for (int M = 2; M <= 5; ++M) {
      const auto st = stack_decoder(channels_for<Fp61>(M, 99), 1);
      const auto out = sia_run(st);
      for (int m = 0; m < M; ++m) {
        const auto& w = out.state.rows[m].combiner;
        auto apply = [&](auto field) {
          auto acc = DiagonalOperator<Fp61>::zeros(7);
          for (int q = 0; q < M; ++q) acc = acc + w[q] * field(st.rows[q]);
          return acc;
        };
        CHECK(apply([](const auto& r) { return r.desired; }) == out.state.g(m));
        CHECK(apply([](const auto& r) { return r.residual; }) == out.state.r(m));
        for (int i = 0; i < M; ++i) {
          CHECK(apply([i](const auto& r) { return r.interferers[i]; }) == out.state.C(m, i));
        }
      }
    }
  }

  SUBCASE("float rings") {
    for (int M = 2; M <= 5; ++M) {
      const auto real = sia_run(stack_decoder(channels_for<double>(M, 5, 64), 0));
      CHECK(real.offdiagonal_residue == 0.0);
      CHECK(real.diagonal_deviation <= 1e-9);
      const auto cplx = sia_run(stack_decoder(channels_for<Complex>(M, 5, 64), 0));
      CHECK(cplx.offdiagonal_residue == 0.0);
      CHECK(cplx.diagonal_deviation <= 1e-9);
      for (int m = 0; m < M; ++m) CHECK(cplx.state.C(m, m) == cplx.Tk);
    }
  }
}

TEST_CASE("Cramer oracle") {
  SUBCASE("small closed forms") {
    const auto st1 = stack_decoder(channels_for<Fp61>(1, 4), 0);
    const auto ref1 = sia_oracle(st1);
    CHECK(ref1.det == st1.C(0, 0));
    CHECK(ref1.desired_numerators[0] == st1.g(0));
    CHECK(ref1.residual_numerators[0] == st1.r(0));

    const auto st2 = stack_decoder(channels_for<Fp61>(2, 4), 2);
    const auto ref2 = sia_oracle(st2);
    CHECK(ref2.det == st2.C(0, 0) * st2.C(1, 1) - st2.C(0, 1) * st2.C(1, 0));
    CHECK(ref2.desired_numerators[1] == st2.C(0, 0) * st2.g(1) - st2.g(0) * st2.C(1, 0));
  }

  SUBCASE("ratios agree with SIA") {
    for (int M = 1; M <= 6; ++M) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto st = stack_decoder(channels_for<Fp61>(M, seed), 0);
        const auto check = check_cramer(sia_run(st), sia_oracle(st));
        CHECK(check.passed);
        CHECK(check.positions_checked == 7);
      }
      const auto rst = stack_decoder(channels_for<double>(M, 1), 0);
      const auto rcheck = check_cramer(sia_run(rst), sia_oracle(rst));
      CHECK(rcheck.passed);
      CHECK(rcheck.worst_relative_error <= 1e-8);
      const auto cst = stack_decoder(channels_for<Complex>(M, 1), 0);
      CHECK(check_cramer(sia_run(cst), sia_oracle(cst)).passed);
    }
  }

  SUBCASE("a corrupted processed state is caught") {
    const auto st = stack_decoder(channels_for<Fp61>(3, 8), 0);
    auto out = sia_run(st);
    out.state.rows[1].desired[3] += Fp61(1);
    const auto check = check_cramer(out, sia_oracle(st));
    CHECK_FALSE(check.passed);
    REQUIRE(check.first_failure);
    CHECK(check.first_failure->find("position 3") != std::string::npos);
  }

  CHECK_THROWS_AS(cofactor_determinant(BlockMatrix<Fp61>(7, std::vector<DiagonalOperator<Fp61>>(7))), InvalidArgument);
}

TEST_CASE("genericity and invertible steps") {
  for (int M = 2; M <= 5; ++M) {
    int nonzero_trials = 0;
    int invertible_trials = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
      const auto st = stack_decoder(channels_for<Fp61>(M, 1000 + trial), trial % (M + 2));
      const auto out = sia_run(st);
      bool nonzero = !out.Tk.has_zero_entry();
      for (int m = 0; m < M; ++m) nonzero = nonzero && !out.state.g(m).has_zero_entry() && !out.state.r(m).has_zero_entry();
      nonzero_trials += nonzero ? 1 : 0;

      bool invertible = true;
      DecoderState<Fp61> cur = st;
      for (int D = 1; D < M; ++D) {
        invertible = invertible && !cofactor_determinant(sia_step_transform(cur, D)).has_zero_entry();
        cur = sia_step(cur, D);
      }
      invertible_trials += invertible ? 1 : 0;
    }
    CHECK(nonzero_trials >= 999);
    CHECK(invertible_trials >= 999);
  }
}

TEST_CASE("degenerate channels") {
  // Identity links make every 2x2 combination vanish; the processed form is
  // all zeros but still structurally valid.
  const auto ch = identity_channels<Fp61>(build_params(4, 2, 1), 5);
  const auto out = sia_run(stack_decoder(ch, 0));
  CHECK(out.Tk.is_zero());
}
