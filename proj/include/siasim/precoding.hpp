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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "siasim/engine.hpp"
#include "siasim/parallel.hpp"
#include "siasim/params.hpp"

namespace siasim {

inline constexpr std::uint64_t kDefaultMemoryBudget = std::uint64_t{2} << 30;
inline constexpr std::uint64_t kDefaultEnumerationBound = std::uint64_t{1} << 24;

enum class GeneratorKind { kResidual, kDesired };

// Names one post-SIA coefficient of decoder k: T_{k,index} (residual) or
// G_{k,index} (desired).
struct GeneratorId {
  int k = 0;
  GeneratorKind kind = GeneratorKind::kResidual;
  int index = 0;

  friend bool operator==(const GeneratorId&, const GeneratorId&) = default;
  std::string label() const;
};

template <Scalar S>
struct GeneratorSet {
  int K = 0;
  int M = 0;
  std::size_t dim = 0;
  std::vector<std::vector<DiagonalOperator<S>>> residual;  // [k][i]
  std::vector<std::vector<DiagonalOperator<S>>> desired;   // [k][r]
  std::vector<DiagonalOperator<S>> common;                  // [k]

  const DiagonalOperator<S>& operator()(const GeneratorId& id) const {
    return id.kind == GeneratorKind::kResidual ? residual[id.k][id.index] : desired[id.k][id.index];
  }
};

// processed[k] must be the SIA output of decoder k for every k. Throws
// DegenerateRealization if some common coefficient has a zero entry.
template <Scalar S>
GeneratorSet<S> extract_generators(std::span<const ProcessedState<S>> processed);

struct ExponentIndex {
  int stream = 0;
  Level level = Level::kBase;
  std::vector<int> exponents;  // one per slot, in IndexSpace::slots() order
};

/**
 * The exponent box of one precoder F^j at one level.
 *
 * Slots are grouped by user: for each k the M residual generators T_{k,i},
 * then the desired generators G_{k,r} for r != j, K(2M-1) slots in total.
 * Exponents range over [0, n) at the base level and [0, n] at the next level.
 * Ordinals enumerate the box lexicographically with slot 0 most significant.
 */
class IndexSpace {
 public:
  IndexSpace(const SchemeParams& params, int stream, Level level, std::optional<GeneratorId> omitted = std::nullopt,
             std::uint64_t enumeration_bound = kDefaultEnumerationBound);

  int stream() const { return stream_; }
  Level level() const { return level_; }
  int users() const { return K_; }
  int homogenization_degree() const { return P_; }
  std::size_t slot_count() const { return slots_.size(); }
  const std::vector<GeneratorId>& slots() const { return slots_; }
  int radix(std::size_t slot) const { return radix_[slot]; }
  std::size_t size() const { return size_; }
  // Slots of user k occupy [block_begin(k), block_begin(k+1)).
  std::size_t block_begin(int k) const { return static_cast<std::size_t>(k) * per_user_; }
  int owner(std::size_t slot) const { return static_cast<int>(slot / per_user_); }
  std::optional<std::size_t> slot_of(const GeneratorId& id) const;
  const std::optional<GeneratorId>& omitted() const { return omitted_; }

  ExponentIndex at(std::size_t ordinal) const;
  void digits_at(std::size_t ordinal, std::vector<int>& out) const;
  // Ordinal of an exponent vector, or nullopt if it lies outside the box.
  std::optional<std::size_t> ordinal_of(std::span<const int> exponents) const;
  // Total slot degree of user k.
  int user_degree(std::span<const int> exponents, int k) const;

 private:
  int stream_;
  Level level_;
  int K_;
  int P_;
  std::size_t per_user_;
  std::optional<GeneratorId> omitted_;
  std::vector<GeneratorId> slots_;
  std::vector<int> radix_;
  std::size_t size_ = 1;
};

// Lexicographic exponent box of F^j at the given level.
IndexSpace enumerate_indices(const SchemeParams& params, int stream, Level level,
                             std::uint64_t enumeration_bound = kDefaultEnumerationBound);

struct BasisOptions {
  // Diagnostic ablation: the named generator keeps exponent 0 at both levels.
  std::optional<GeneratorId> omitted;
  std::uint64_t memory_budget = kDefaultMemoryBudget;
  std::uint64_t enumeration_bound = kDefaultEnumerationBound;
  WorkerPool* pool = nullptr;
  bool force_on_demand = false;
};

/**
 * Columns of F^j at one level. Column c is
 *   prod_k [ prod_slots gen^e ∘ T_k^(P - s_k) ] w,   w = all-ones,
 * with the same homogenization degree P = (2M-1)n at both levels.
 * Columns are stored when the whole scheme fits the memory budget, otherwise
 * computed on demand.
 */
template <Scalar S>
class PrecodingBasis {
 public:
  PrecodingBasis(std::shared_ptr<const GeneratorSet<S>> generators, IndexSpace space, bool materialize,
                 WorkerPool* pool);

  int stream() const { return space_.stream(); }
  Level level() const { return space_.level(); }
  const IndexSpace& indices() const { return space_; }
  std::size_t dim() const { return generators_->dim; }
  std::size_t size() const { return space_.size(); }
  bool materialized() const { return !data_.empty() || size() == 0; }

  // Column c; `scratch` is used only for on-demand columns.
  std::span<const S> column(std::size_t c, std::vector<S>& scratch) const;

  // Writes columns [begin, end) contiguously into out (column-major).
  void compute_columns(std::size_t begin, std::size_t end, std::span<S> out) const;

 private:
  struct PowerTables {
    std::vector<std::vector<DiagonalOperator<S>>> slot_powers;  // [slot][e]
    std::vector<std::vector<DiagonalOperator<S>>> common_powers;  // [k][e], e in [0, P]
  };

  std::shared_ptr<const GeneratorSet<S>> generators_;
  IndexSpace space_;
  std::shared_ptr<const PowerTables> powers_;
  std::vector<S> data_;
};

template <Scalar S>
PrecodingBasis<S> build_basis(std::shared_ptr<const GeneratorSet<S>> generators, const SchemeParams& params, int stream,
                              Level level, const BasisOptions& options = {});

template <Scalar S>
struct SchemeBases {
  std::vector<PrecodingBasis<S>> base;  // F_n^j, j = 0..M-1
  std::vector<PrecodingBasis<S>> next;  // F_{n+1}^j
};

// F_n^j and F_{n+1}^j for every stream.
template <Scalar S>
SchemeBases<S> build_all_bases(std::shared_ptr<const GeneratorSet<S>> generators, const SchemeParams& params,
                               const BasisOptions& options = {});

struct ConditionResult {
  int stream = 0;
  GeneratorId generator;
  std::size_t columns_checked = 0;
  bool index_shift_ok = true;   // alpha + e_slot stays inside the next-level box
  bool columns_ok = true;       // gen ∘ F_n(alpha) is a column of T_k ∘ F_{n+1}
  bool homogenizer_ok = true;   // per-user T exponents agree on both sides
  bool passed = true;
  std::optional<std::vector<int>> counterexample;
};

struct NestingResult {
  int stream = 0;
  bool passed = true;
  std::optional<std::vector<int>> counterexample;
};

struct AlignmentReport {
  std::vector<ConditionResult> conditions;  // stream-major, then slot order
  std::vector<NestingResult> nesting;       // F_n^j columns are columns of F_{n+1}^j
  double worst_relative_error = 0.0;        // floats only
  bool passed = true;
};

struct AlignmentOptions {
  double float_tolerance = 1e-9;
  WorkerPool* pool = nullptr;
};

template <Scalar S>
AlignmentReport check_alignment(const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                const SchemeParams& params, const AlignmentOptions& options = {});

}  // namespace siasim
