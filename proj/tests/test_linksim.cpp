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

#include <cmath>

#include "siasim/errors.hpp"
#include "siasim/linksim.hpp"

using namespace siasim;

namespace {

template <FloatScalar S>
Scheme<S> scheme_for(int K, int M, int n, std::uint64_t seed) {
  return build_scheme(sample_channels<S>(build_params(K, M, n), seed));
}

std::vector<double> snr_range(double lo_db, double hi_db, int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(db_to_linear(lo_db + (hi_db - lo_db) * i / (points - 1)));
  return out;
}

}  // namespace

TEST_CASE("estimate_dof_slope") {
  const auto snr = snr_range(20, 60, 5);
  std::vector<double> line;
  for (double s : snr) line.push_back(2.0 * std::log2(s) + 5.0);
  const auto fit = estimate_dof_slope(snr, line);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);
  CHECK(fit.points == 5);

  SUBCASE("bounded perturbation over 40 dB") {
    // Worst case over sign patterns of +-0.1 perturbations.
    const auto wide = snr_range(20, 60, 5);
    double worst = 0.0;
    for (int mask = 0; mask < 32; ++mask) {
      std::vector<double> r;
      for (int i = 0; i < 5; ++i) r.push_back(2.0 * std::log2(wide[i]) + 5.0 + ((mask >> i) & 1 ? 0.1 : -0.1));
      worst = std::max(worst, std::abs(estimate_dof_slope(wide, r).slope - 2.0));
    }
    CHECK(worst <= 0.05);
  }

  CHECK_THROWS_AS(estimate_dof_slope({1e4}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(estimate_dof_slope({1e4, 1e5}, {1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(estimate_dof_slope({1e4, 2e4, 4e4}, {1.0, 2.0, 3.0}), InvalidArgument);
  CHECK_THROWS_AS(estimate_dof_slope({0.0, 1e2, 1e4}, {1.0, 2.0, 3.0}), InvalidArgument);
}

TEST_CASE("frames") {
  const auto s = scheme_for<Complex>(3, 1, 2, 4);
  Rng rng(1);
  const auto frame = random_transmit_frame(s, 1e3, rng);
  CHECK(frame.x.size() == 3);
  CHECK(frame.x[0].size() == 35);

  SUBCASE("noiseless reception matches the channel equation") {
    const auto rx = propagate(s, frame, nullptr);
    for (int r = 0; r < 3; ++r) {
      double worst = 0.0;
      double scale = 0.0;
      for (std::size_t t = 0; t < 35; ++t) {
        Complex expect = 0.0;
        for (int i = 0; i < 3; ++i) expect += s.channels(r, i)[t] * frame.x[i][t];
        worst = std::max(worst, std::abs(rx.y[r][t] - expect));
        scale = std::max(scale, std::abs(expect));
      }
      CHECK(worst <= 1e-12 * scale);
    }
  }

  SUBCASE("power per extension symbol") {
    double energy = 0.0;
    const int draws = 400;
    Rng r2(7);
    for (int d = 0; d < draws; ++d) {
      const auto f = random_transmit_frame(s, 10.0, r2);
      for (auto v : f.x[1]) energy += std::norm(v);
    }
    CHECK(energy / (draws * 35.0) == doctest::Approx(10.0).epsilon(0.1));
  }

  CHECK_THROWS_AS(make_transmit_frame(s, 1.0, {}), InvalidArgument);
}

TEST_CASE("zero power gives zero rates") {
  const auto s = scheme_for<Complex>(3, 1, 1, 2);
  const auto rep = run_link(s, {0.0});
  REQUIRE(rep.points.size() == 1);
  CHECK(rep.points[0].sum_rate == 0.0);
  for (double r : rep.points[0].user_rates) CHECK(r == 0.0);
  CHECK_FALSE(rep.fit.has_value());
}

TEST_CASE("sum-rate slope at (3,1,1)") {
  const auto s = scheme_for<Complex>(3, 1, 1, 11);
  LinkOptions opts;
  opts.seed = 3;
  const auto rep = run_link(s, snr_range(40, 60, 5), opts);
  CHECK(rep.target_slope == doctest::Approx(1.0 / 3.0));
  REQUIRE(rep.fit.has_value());
  CHECK(std::abs(rep.fit->slope - 1.0 / 3.0) <= 0.1 / 3.0);
  for (const auto& p : rep.points) {
    for (double r : p.user_rates) CHECK(r >= 0.0);
    for (const auto& l : p.subspaces) {
      CHECK_FALSE(l.rank_deficient);
      CHECK(l.empirical_mse == doctest::Approx(l.predicted_mse).epsilon(0.5));
    }
  }
  // Rates increase with SNR.
  for (std::size_t i = 1; i < rep.points.size(); ++i) CHECK(rep.points[i].sum_rate > rep.points[i - 1].sum_rate);

  SUBCASE("real ring counts half a bit per real dimension") {
    const auto r = scheme_for<double>(3, 1, 1, 11);
    const auto rr = run_link(r, snr_range(40, 60, 5), opts);
    CHECK(rr.target_slope == doctest::Approx(1.0 / 6.0));
    REQUIRE(rr.fit.has_value());
    CHECK(std::abs(rr.fit->slope - 1.0 / 6.0) <= 0.1 / 6.0);
  }
}

TEST_CASE("slope at (3,1,2)") {
  const auto s = scheme_for<Complex>(3, 1, 2, 5);
  const auto rep = run_link(s, snr_range(60, 100, 5));
  REQUIRE(rep.fit.has_value());
  CHECK(rep.target_slope == doctest::Approx(3.0 * 8.0 / 35.0));
  CHECK(std::abs(rep.fit->slope - rep.target_slope) <= 0.1 * rep.target_slope);
}

TEST_CASE("determinism under parallel schedules") {
  const auto s = scheme_for<Complex>(3, 1, 1, 6);
  WorkerPool pool(8);
  LinkOptions serial;
  serial.seed = 9;
  LinkOptions parallel = serial;
  parallel.pool = &pool;
  const auto a = run_link(s, snr_range(0, 60, 7), serial);
  const auto b = run_link(s, snr_range(0, 60, 7), parallel);
  for (std::size_t p = 0; p < a.points.size(); ++p) {
    CHECK(a.points[p].sum_rate == b.points[p].sum_rate);
    for (std::size_t i = 0; i < a.points[p].subspaces.size(); ++i) {
      CHECK(a.points[p].subspaces[i].empirical_mse == b.points[p].subspaces[i].empirical_mse);
    }
  }
}

TEST_CASE("interference nulling") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto probe = probe_leakage(scheme_for<Complex>(3, 1, 1, seed), seed);
    CHECK(probe.passed);
    CHECK(probe.worst_amplitude <= 1e-10);
    CHECK(probe.worst_energy <= 1e-18);
    CHECK(probe.worst_symbol_sensitivity <= 1e-10);
  }
  CHECK(probe_leakage(scheme_for<double>(3, 1, 2, 1), 1).passed);
  CHECK(probe_leakage(scheme_for<Complex>(3, 1, 2, 1), 1).passed);
}

TEST_CASE("desired streams are separable") {
  int invertible = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto rep = run_link(scheme_for<Complex>(3, 1, 1, seed), {1.0}, LinkOptions{.noise_realizations = 0});
    bool ok = true;
    for (const auto& l : rep.points[0].subspaces) ok = ok && !l.rank_deficient && std::isfinite(l.condition_number);
    invertible += ok ? 1 : 0;
  }
  CHECK(invertible >= 99);
}

TEST_CASE("link size bound") {
  const auto s = scheme_for<Complex>(3, 1, 2, 1);
  LinkOptions opts;
  opts.lambda_bound = 16;
  CHECK_THROWS_AS(run_link(s, {1.0}, opts), ResourceLimit);
  CHECK_THROWS_AS(run_link(s, {-1.0}), InvalidArgument);
}
