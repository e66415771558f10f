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

#include "siasim/params.hpp"

#include <limits>

#include <fmt/format.h>

#include "siasim/errors.hpp"

namespace siasim {

SchemeParams build_params(int K, int M, int n, std::uint64_t materialization_bound) {
  if (M < 1) throw InvalidArgument(fmt::format("cooperation order M must be >= 1, got {}", M));
  if (n < 1) throw InvalidArgument(fmt::format("extension index n must be >= 1, got {}", n));
  if (K != M + 2) throw InvalidArgument(fmt::format("scheme requires K = M + 2, got K = {}, M = {}", K, M));

  SchemeParams p;
  p.K = K;
  p.M = M;
  p.n = n;
  p.l = K * (2 * M - 1);
  p.mu_n = boost::multiprecision::pow(BigInt(n), static_cast<unsigned>(p.l));
  p.mu_n1 = boost::multiprecision::pow(BigInt(n + 1), static_cast<unsigned>(p.l));
  p.lambda_n = p.mu_n + M * p.mu_n1;
  p.P = (2 * M - 1) * n;
  p.materialization_bound = materialization_bound;
  p.materializable = p.lambda_n <= materialization_bound;
  return p;
}

std::size_t SchemeParams::extension_length() const {
  if (!materializable) {
    throw ResourceLimit(fmt::format("extension length {} exceeds the materialization bound {}",
                                    to_decimal(lambda_n), materialization_bound));
  }
  return lambda_n.convert_to<std::size_t>();
}

std::size_t SchemeParams::stream_count(Level level) const {
  const BigInt& mu = level == Level::kBase ? mu_n : mu_n1;
  if (mu > BigInt(std::numeric_limits<std::size_t>::max() / 2)) {
    throw ResourceLimit(fmt::format("precoder column count {} is not addressable", to_decimal(mu)));
  }
  return mu.convert_to<std::size_t>();
}

Rational SchemeParams::total_dof() const { return Rational(BigInt(K) * M * mu_n, lambda_n); }

Rational SchemeParams::dof_limit() const { return Rational(BigInt(K) * M, BigInt(M + 1)); }

int wrap_index(long long i, int K) {
  long long r = i % K;
  if (r < 0) r += K;
  return static_cast<int>(r);
}

CooperationSet cooperation_set(int i, int K, int M) {
  if (K < 1 || M < 1 || M > K) throw InvalidArgument(fmt::format("invalid cooperation order {} for {} users", M, K));
  if (i < 0 || i >= K) throw InvalidArgument(fmt::format("receiver index {} out of range [0, {})", i, K));
  CooperationSet set;
  set.owner = i;
  set.members.reserve(M);
  for (int m = 0; m < M; ++m) set.members.push_back(wrap_index(i + m, K));
  return set;
}

std::string to_decimal(const BigInt& v) { return v.str(); }

std::string to_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace siasim
