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

#include "siasim/verifier.hpp"

#include <chrono>

#include <fmt/format.h>

#include "siasim/errors.hpp"

namespace siasim {
namespace {

void require_budget(std::size_t rows, std::size_t cols, std::size_t scalar_bytes, std::uint64_t budget) {
  const BigInt bytes = BigInt(rows) * cols * scalar_bytes;
  if (bytes > budget) {
    throw ResourceLimit(fmt::format("{}x{} matrix needs {} bytes, above the memory budget {}", rows, cols,
                                    to_decimal(bytes), budget));
  }
}

// Writes gen ∘ basis columns into m at rows [row0, row0 + dim) and columns
// starting at col0.
template <Scalar S>
void place_block(DenseMatrix<S>& m, std::size_t row0, std::size_t col0, const DiagonalOperator<S>& gen,
                 const PrecodingBasis<S>& basis, WorkerPool* pool) {
  parallel_for(pool, basis.size(), [&](std::size_t b, std::size_t e) {
    std::vector<S> scratch;
    for (std::size_t c = b; c < e; ++c) {
      const auto col = basis.column(c, scratch);
      for (std::size_t t = 0; t < col.size(); ++t) m(row0 + t, col0 + c) = gen[t] * col[t];
    }
  });
}

template <Scalar S>
void require_shape(const SchemeBases<S>& bases, const GeneratorSet<S>& generators) {
  if (static_cast<int>(bases.base.size()) != generators.M || static_cast<int>(bases.next.size()) != generators.M) {
    throw InvalidArgument("decodability check needs both levels of every stream");
  }
}

}  // namespace

template <Scalar S>
DenseMatrix<S> assemble_condition(int k, int j, const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                  std::uint64_t memory_budget, WorkerPool* pool) {
  require_shape(bases, generators);
  if (k < 0 || k >= generators.K) throw InvalidArgument(fmt::format("decoder {} out of range", k));
  if (j < 0 || j >= generators.M) throw InvalidArgument(fmt::format("stream {} out of range", j));
  const std::size_t rows = generators.dim;
  std::size_t cols = bases.base[j].size();
  for (const auto& b : bases.next) cols += b.size();
  require_budget(rows, cols, sizeof(S), memory_budget);

  DenseMatrix<S> m(rows, cols);
  place_block(m, 0, 0, generators.desired[k][j], bases.base[j], pool);
  std::size_t col0 = bases.base[j].size();
  for (const auto& b : bases.next) {
    place_block(m, 0, col0, generators.common[k], b, pool);
    col0 += b.size();
  }
  return m;
}

template <Scalar S>
DenseMatrix<S> assemble_full_matrix(int k, const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                    std::uint64_t memory_budget, WorkerPool* pool) {
  require_shape(bases, generators);
  if (k < 0 || k >= generators.K) throw InvalidArgument(fmt::format("decoder {} out of range", k));
  const auto M = static_cast<std::size_t>(generators.M);
  const std::size_t dim = generators.dim;
  std::size_t desired_cols = 0;
  for (const auto& b : bases.base) desired_cols += b.size();
  std::size_t group_cols = 0;
  for (const auto& b : bases.next) group_cols += b.size();
  require_budget(M * dim, desired_cols + M * group_cols, sizeof(S), memory_budget);

  DenseMatrix<S> m(M * dim, desired_cols + M * group_cols);
  std::size_t col0 = 0;
  for (std::size_t i = 0; i < M; ++i) {
    place_block(m, i * dim, col0, generators.desired[k][i], bases.base[i], pool);
    col0 += bases.base[i].size();
  }
  for (std::size_t i = 0; i < M; ++i) {
    for (const auto& b : bases.next) {
      place_block(m, i * dim, col0, generators.common[k], b, pool);
      col0 += b.size();
    }
  }
  return m;
}

template <Scalar S>
RankReport check_rank_conditions(int k, const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                 const RankOptions& options, std::uint64_t memory_budget) {
  RankReport report;
  report.k = k;
  report.passed = true;
  for (int j = 0; j < generators.M; ++j) {
    const auto start = std::chrono::steady_clock::now();
    DenseMatrix<S> m = assemble_condition(k, j, bases, generators, memory_budget, options.pool);
    SubspaceRank sub;
    sub.subspace = j;
    sub.rows = m.rows();
    sub.cols = m.cols();
    sub.required = generators.dim;
    sub.policy = options.policy;
    sub.rank = rank_in_place(m, options);
    sub.passed = sub.rank == sub.required;
    sub.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.passed = report.passed && sub.passed;
    report.subspaces.push_back(sub);
  }
  return report;
}

DofReport dof_table(int K, int M, int n_min, int n_max) {
  if (n_min < 1 || n_max < n_min) throw InvalidArgument(fmt::format("invalid n range [{}, {}]", n_min, n_max));
  DofReport report;
  report.K = K;
  report.M = M;
  for (int n = n_min; n <= n_max; ++n) {
    const SchemeParams p = build_params(K, M, n);
    report.rows.push_back({n, p.mu_n, p.mu_n1, p.lambda_n, p.total_dof()});
    report.limit = p.dof_limit();
  }
  return report;
}

#define SIASIM_INSTANTIATE(S)                                                                                    \
  template DenseMatrix<S> assemble_condition<S>(int, int, const SchemeBases<S>&, const GeneratorSet<S>&,         \
                                                std::uint64_t, WorkerPool*);                                     \
  template DenseMatrix<S> assemble_full_matrix<S>(int, const SchemeBases<S>&, const GeneratorSet<S>&,            \
                                                  std::uint64_t, WorkerPool*);                                   \
  template RankReport check_rank_conditions<S>(int, const SchemeBases<S>&, const GeneratorSet<S>&,               \
                                               const RankOptions&, std::uint64_t);

SIASIM_INSTANTIATE(double)
SIASIM_INSTANTIATE(Complex)
SIASIM_INSTANTIATE(Fp61)
#undef SIASIM_INSTANTIATE

}  // namespace siasim
