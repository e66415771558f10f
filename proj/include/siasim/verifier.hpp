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
#include <vector>

#include "siasim/dense_matrix.hpp"
#include "siasim/precoding.hpp"

namespace siasim {

// [G_{k,j} ∘ F_n^j | T_k ∘ F_{n+1}^0 | ... | T_k ∘ F_{n+1}^{M-1}], lambda_n
// rows by mu_n + M mu_{n+1} = lambda_n columns.
template <Scalar S>
DenseMatrix<S> assemble_condition(int k, int j, const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                  std::uint64_t memory_budget = kDefaultMemoryBudget, WorkerPool* pool = nullptr);

/**
 * The M lambda_n x M lambda_n decodability matrix of decoder k: block row i
 * holds G_{k,i} ∘ F_n^i in desired column block i and the interference group
 * T_k ∘ [F_{n+1}^0 ... F_{n+1}^{M-1}] in interference column block i.
 */
template <Scalar S>
DenseMatrix<S> assemble_full_matrix(int k, const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                    std::uint64_t memory_budget = kDefaultMemoryBudget, WorkerPool* pool = nullptr);

struct SubspaceRank {
  int subspace = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rank = 0;
  std::size_t required = 0;
  RankPolicy policy = RankPolicy::kExact;
  double elapsed_seconds = 0.0;
  bool passed = false;
};

struct RankReport {
  int k = 0;
  std::vector<SubspaceRank> subspaces;
  bool passed = false;  // every subspace has rank lambda_n
};

template <Scalar S>
RankReport check_rank_conditions(int k, const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                 const RankOptions& options, std::uint64_t memory_budget = kDefaultMemoryBudget);

struct DofRow {
  int n = 0;
  BigInt mu_n;
  BigInt mu_n1;
  BigInt lambda_n;
  Rational dof;  // K M mu_n / lambda_n
};

struct DofReport {
  int K = 0;
  int M = 0;
  std::vector<DofRow> rows;
  Rational limit;  // K M / (M+1)
};

DofReport dof_table(int K, int M, int n_min, int n_max);

}  // namespace siasim
