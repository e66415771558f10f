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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace siasim {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr std::uint64_t kDefaultMaterializationBound = std::uint64_t{1} << 14;

// The two precoder levels: F_n (mu_n columns) and F_{n+1} (mu_{n+1} columns).
enum class Level { kBase, kNext };

inline const char* to_string(Level level) { return level == Level::kBase ? "n" : "n+1"; }

/**
 * Dimensions of the symbol-extension scheme for K = M + 2 users.
 *
 * Users, receivers and subspaces are 0-based throughout the library.
 */
struct SchemeParams {
  int K = 0;
  int M = 0;
  int n = 0;
  int l = 0;          // number of exponent slots, K(2M-1)
  BigInt mu_n;        // n^l
  BigInt mu_n1;       // (n+1)^l
  BigInt lambda_n;    // mu_n + M mu_{n+1}
  int P = 0;          // homogenization degree (2M-1)n
  std::uint64_t materialization_bound = kDefaultMaterializationBound;
  bool materializable = false;  // lambda_n <= materialization_bound

  // lambda_n as a machine size; throws ResourceLimit past the bound.
  std::size_t extension_length() const;
  // Column count of one precoder at the given level, as a machine size.
  std::size_t stream_count(Level level) const;
  int slots_per_user() const { return 2 * M - 1; }

  Rational total_dof() const;  // K M mu_n / lambda_n
  Rational dof_limit() const;  // K M / (M+1)
};

SchemeParams build_params(int K, int M, int n, std::uint64_t materialization_bound = kDefaultMaterializationBound);

// Index modulo K into [0, K).
int wrap_index(long long i, int K);

struct CooperationSet {
  int owner = 0;
  std::vector<int> members;  // owner, owner+1, ..., owner+M-1 (mod K)
};

CooperationSet cooperation_set(int i, int K, int M);

std::string to_decimal(const BigInt& v);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

}  // namespace siasim
