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

#include "siasim/precoding.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "siasim/errors.hpp"

namespace siasim {

std::string GeneratorId::label() const {
  return fmt::format("{}[{}][{}]", kind == GeneratorKind::kResidual ? "T" : "G", k, index);
}

template <Scalar S>
GeneratorSet<S> extract_generators(std::span<const ProcessedState<S>> processed) {
  if (processed.empty()) throw InvalidArgument("no processed decoders");
  GeneratorSet<S> set;
  set.K = static_cast<int>(processed.size());
  set.M = processed.front().state.M;
  set.dim = processed.front().state.dim;
  if (set.K != set.M + 2) throw InvalidArgument(fmt::format("expected {} processed decoders, got {}", set.M + 2, set.K));
  for (int k = 0; k < set.K; ++k) {
    const auto& p = processed[k];
    if (p.state.k != k) throw InvalidArgument(fmt::format("processed decoder {} found at position {}", p.state.k, k));
    if (p.state.M != set.M || p.state.dim != set.dim) throw InvalidArgument("processed decoders disagree on shape");
    if (p.Tk.has_zero_entry()) {
      throw DegenerateRealization(fmt::format("common coefficient of decoder {} has a zero entry", k));
    }
    std::vector<DiagonalOperator<S>> residual;
    std::vector<DiagonalOperator<S>> desired;
    for (const auto& row : p.state.rows) {
      residual.push_back(row.residual);
      desired.push_back(row.desired);
    }
    set.residual.push_back(std::move(residual));
    set.desired.push_back(std::move(desired));
    set.common.push_back(p.Tk);
  }
  return set;
}

IndexSpace::IndexSpace(const SchemeParams& params, int stream, Level level, std::optional<GeneratorId> omitted,
                       std::uint64_t enumeration_bound)
    : stream_(stream),
      level_(level),
      K_(params.K),
      P_(params.P),
      per_user_(static_cast<std::size_t>(2 * params.M - 1)),
      omitted_(omitted) {
  if (stream < 0 || stream >= params.M) {
    throw InvalidArgument(fmt::format("stream {} out of range [0, {})", stream, params.M));
  }
  const int range = level == Level::kBase ? params.n : params.n + 1;
  BigInt count = 1;
  for (int k = 0; k < params.K; ++k) {
    for (int i = 0; i < params.M; ++i) slots_.push_back({k, GeneratorKind::kResidual, i});
    for (int r = 0; r < params.M; ++r) {
      if (r != stream) slots_.push_back({k, GeneratorKind::kDesired, r});
    }
  }
  for (const auto& slot : slots_) {
    const int radix = omitted && *omitted == slot ? 1 : range;
    radix_.push_back(radix);
    count *= radix;
  }
  if (count > enumeration_bound) {
    throw ResourceLimit(fmt::format("precoder F^{} at level {} has {} columns, above the enumeration bound {}", stream,
                                    to_string(level), to_decimal(count), enumeration_bound));
  }
  size_ = count.convert_to<std::size_t>();
}

std::optional<std::size_t> IndexSpace::slot_of(const GeneratorId& id) const {
  const auto it = std::find(slots_.begin(), slots_.end(), id);
  if (it == slots_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - slots_.begin());
}

void IndexSpace::digits_at(std::size_t ordinal, std::vector<int>& out) const {
  out.assign(slots_.size(), 0);
  for (std::size_t s = slots_.size(); s-- > 0;) {
    out[s] = static_cast<int>(ordinal % static_cast<std::size_t>(radix_[s]));
    ordinal /= static_cast<std::size_t>(radix_[s]);
  }
}

ExponentIndex IndexSpace::at(std::size_t ordinal) const {
  if (ordinal >= size_) throw InvalidArgument(fmt::format("ordinal {} out of range [0, {})", ordinal, size_));
  ExponentIndex idx{stream_, level_, {}};
  digits_at(ordinal, idx.exponents);
  return idx;
}

std::optional<std::size_t> IndexSpace::ordinal_of(std::span<const int> exponents) const {
  if (exponents.size() != slots_.size()) return std::nullopt;
  std::size_t ordinal = 0;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (exponents[s] < 0 || exponents[s] >= radix_[s]) return std::nullopt;
    ordinal = ordinal * static_cast<std::size_t>(radix_[s]) + static_cast<std::size_t>(exponents[s]);
  }
  return ordinal;
}

int IndexSpace::user_degree(std::span<const int> exponents, int k) const {
  int degree = 0;
  for (std::size_t s = block_begin(k); s < block_begin(k + 1); ++s) degree += exponents[s];
  return degree;
}

IndexSpace enumerate_indices(const SchemeParams& params, int stream, Level level, std::uint64_t enumeration_bound) {
  return IndexSpace(params, stream, level, std::nullopt, enumeration_bound);
}

template <Scalar S>
PrecodingBasis<S>::PrecodingBasis(std::shared_ptr<const GeneratorSet<S>> generators, IndexSpace space,
                                  bool materialize, WorkerPool* pool)
    : generators_(std::move(generators)), space_(std::move(space)) {
  const auto& gens = *generators_;
  auto tables = std::make_shared<PowerTables>();
  for (std::size_t s = 0; s < space_.slot_count(); ++s) {
    const auto& gen = gens(space_.slots()[s]);
    std::vector<DiagonalOperator<S>> powers{DiagonalOperator<S>::identity(gens.dim)};
    for (int e = 1; e < space_.radix(s); ++e) powers.push_back(diag_compose(powers.back(), gen));
    tables->slot_powers.push_back(std::move(powers));
  }
  for (int k = 0; k < gens.K; ++k) {
    std::vector<DiagonalOperator<S>> powers{DiagonalOperator<S>::identity(gens.dim)};
    for (int e = 1; e <= space_.homogenization_degree(); ++e) powers.push_back(diag_compose(powers.back(), gens.common[k]));
    tables->common_powers.push_back(std::move(powers));
  }
  powers_ = std::move(tables);

  if (materialize && size() > 0) {
    data_.resize(size() * dim());
    parallel_for(pool, size(), [&](std::size_t b, std::size_t e) {
      compute_columns(b, e, std::span<S>(data_).subspan(b * dim(), (e - b) * dim()));
    });
  }
}

// Columns are products of one factor per layer: each slot is a layer and each
// user's block of slots is followed by its homogenizer layer. Consecutive
// ordinals share a prefix of layers, so only the suffix after the most
// significant changed digit is recomputed.
template <Scalar S>
void PrecodingBasis<S>::compute_columns(std::size_t begin, std::size_t end, std::span<S> out) const {
  if (begin >= end) return;
  const std::size_t d = dim();
  const std::size_t slots = space_.slot_count();
  const int K = space_.users();
  const int P = space_.homogenization_degree();
  const std::size_t per_user = slots / static_cast<std::size_t>(K);
  const std::size_t layers = slots + static_cast<std::size_t>(K);

  auto layer_of_slot = [&](std::size_t s) { return s + s / per_user; };
  std::vector<int> digits;
  space_.digits_at(begin, digits);

  auto factor = [&](std::size_t layer) -> const DiagonalOperator<S>& {
    const std::size_t k = layer / (per_user + 1);
    const std::size_t within = layer % (per_user + 1);
    if (within < per_user) {
      const std::size_t s = k * per_user + within;
      return powers_->slot_powers[s][digits[s]];
    }
    const int exponent = P - space_.user_degree(digits, static_cast<int>(k));
    if (exponent < 0) throw InternalError("negative homogenizer exponent");
    return powers_->common_powers[k][exponent];
  };

  // prefix[L] = product of layers 0..L; the last layer is written straight
  // into the output column.
  std::vector<std::vector<S>> prefix(layers - 1, std::vector<S>(d));
  auto recompute = [&](std::size_t from, std::span<S> column) {
    for (std::size_t L = from; L < layers; ++L) {
      const auto& f = factor(L);
      S* dst = L + 1 == layers ? column.data() : prefix[L].data();
      if (L == 0) {
        std::copy(f.entries().begin(), f.entries().end(), dst);
      } else {
        const S* src = prefix[L - 1].data();
        for (std::size_t t = 0; t < d; ++t) dst[t] = src[t] * f[t];
      }
    }
  };

  recompute(0, out.subspan(0, d));
  for (std::size_t c = begin + 1; c < end; ++c) {
    std::size_t s = slots;
    while (s-- > 0) {
      if (++digits[s] < space_.radix(s)) break;
      digits[s] = 0;
    }
    recompute(layer_of_slot(s), out.subspan((c - begin) * d, d));
  }
}

template <Scalar S>
std::span<const S> PrecodingBasis<S>::column(std::size_t c, std::vector<S>& scratch) const {
  if (c >= size()) throw InvalidArgument(fmt::format("column {} out of range [0, {})", c, size()));
  if (!data_.empty()) return std::span<const S>(data_).subspan(c * dim(), dim());
  scratch.resize(dim());
  compute_columns(c, c + 1, scratch);
  return scratch;
}

namespace {

template <Scalar S>
std::uint64_t scheme_scalars(const SchemeParams& params) {
  const BigInt total = params.lambda_n * (params.mu_n + params.M * params.mu_n1) * sizeof(S);
  return total > BigInt(std::numeric_limits<std::uint64_t>::max()) ? std::numeric_limits<std::uint64_t>::max()
                                                                    : total.convert_to<std::uint64_t>();
}

}  // namespace

template <Scalar S>
PrecodingBasis<S> build_basis(std::shared_ptr<const GeneratorSet<S>> generators, const SchemeParams& params, int stream,
                              Level level, const BasisOptions& options) {
  if (!generators) throw InvalidArgument("missing generator set");
  if (generators->K != params.K || generators->M != params.M) {
    throw InvalidArgument("generator set does not match scheme parameters");
  }
  IndexSpace space(params, stream, level, options.omitted, options.enumeration_bound);
  const bool materialize = !options.force_on_demand && scheme_scalars<S>(params) <= options.memory_budget;
  return PrecodingBasis<S>(std::move(generators), std::move(space), materialize, options.pool);
}

template <Scalar S>
SchemeBases<S> build_all_bases(std::shared_ptr<const GeneratorSet<S>> generators, const SchemeParams& params,
                               const BasisOptions& options) {
  SchemeBases<S> bases;
  for (int j = 0; j < params.M; ++j) {
    bases.base.push_back(build_basis(generators, params, j, Level::kBase, options));
    bases.next.push_back(build_basis(generators, params, j, Level::kNext, options));
  }
  return bases;
}

namespace {

template <Scalar S>
bool columns_match(std::span<const S> lhs, std::span<const S> rhs, double tolerance, double& worst) {
  if constexpr (ExactScalar<S>) {
    return std::equal(lhs.begin(), lhs.end(), rhs.begin(), rhs.end());
  } else {
    double scale = 0.0;
    double diff = 0.0;
    for (std::size_t t = 0; t < lhs.size(); ++t) {
      scale = std::max({scale, ScalarTraits<S>::magnitude(lhs[t]), ScalarTraits<S>::magnitude(rhs[t])});
      diff = std::max(diff, ScalarTraits<S>::magnitude(lhs[t] - rhs[t]));
    }
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    if (rel <= tolerance) worst = std::max(worst, rel);
    return rel <= tolerance;
  }
}

template <Scalar S>
ConditionResult check_condition(const PrecodingBasis<S>& base, const PrecodingBasis<S>& next,
                                const GeneratorSet<S>& gens, std::size_t slot, double tolerance, double& worst) {
  const IndexSpace& lo = base.indices();
  const IndexSpace& hi = next.indices();
  const GeneratorId id = lo.slots()[slot];
  const int k = lo.owner(slot);
  const int P = lo.homogenization_degree();
  const auto& gen = gens(id);
  const auto& common = gens.common[k];

  ConditionResult result;
  result.stream = base.stream();
  result.generator = id;

  std::vector<int> alpha;
  std::vector<int> shifted;
  std::vector<S> scratch_lo;
  std::vector<S> scratch_hi;
  std::vector<S> lhs(base.dim());
  std::vector<S> rhs(base.dim());

  for (std::size_t a = 0; a < lo.size(); ++a) {
    lo.digits_at(a, alpha);
    shifted = alpha;
    ++shifted[slot];
    ++result.columns_checked;
    bool ok = true;

    // Integer identity: both sides carry the same power of every T_k'. The
    // left side is gen ∘ F_n(alpha), the right side T_k ∘ F_{n+1}(alpha + e).
    for (int user = 0; user < lo.users(); ++user) {
      const int left = P - lo.user_degree(alpha, user);
      const int right = P - hi.user_degree(shifted, user) + (user == k ? 1 : 0);
      if (left != right || P - hi.user_degree(shifted, user) < 0) {
        result.homogenizer_ok = false;
        ok = false;
      }
    }

    const auto col = base.column(a, scratch_lo);
    for (std::size_t t = 0; t < lhs.size(); ++t) lhs[t] = gen[t] * col[t];

    const auto witness = hi.ordinal_of(shifted);
    if (!witness) {
      result.index_shift_ok = false;
      ok = false;
    }
    bool found = false;
    if (witness) {
      const auto target = next.column(*witness, scratch_hi);
      for (std::size_t t = 0; t < rhs.size(); ++t) rhs[t] = common[t] * target[t];
      found = columns_match<S>(lhs, rhs, tolerance, worst);
    } else {
      // No index witness; fall back to searching every column.
      for (std::size_t c = 0; c < next.size() && !found; ++c) {
        const auto target = next.column(c, scratch_hi);
        for (std::size_t t = 0; t < rhs.size(); ++t) rhs[t] = common[t] * target[t];
        found = columns_match<S>(lhs, rhs, tolerance, worst);
      }
    }
    if (!found) {
      result.columns_ok = false;
      ok = false;
    }
    if (!ok && !result.counterexample) result.counterexample = alpha;
  }
  result.passed = result.index_shift_ok && result.columns_ok && result.homogenizer_ok;
  return result;
}

}  // namespace

template <Scalar S>
AlignmentReport check_alignment(const SchemeBases<S>& bases, const GeneratorSet<S>& generators,
                                const SchemeParams& params, const AlignmentOptions& options) {
  if (static_cast<int>(bases.base.size()) != params.M || static_cast<int>(bases.next.size()) != params.M) {
    throw InvalidArgument("alignment check needs both levels of every stream");
  }
  struct Task {
    int stream;
    std::size_t slot;
  };
  std::vector<Task> tasks;
  for (int j = 0; j < params.M; ++j) {
    for (std::size_t s = 0; s < bases.base[j].indices().slot_count(); ++s) tasks.push_back({j, s});
  }

  AlignmentReport report;
  report.conditions.resize(tasks.size());
  std::vector<double> worst(tasks.size(), 0.0);
  parallel_for(options.pool, tasks.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      const auto& task = tasks[t];
      report.conditions[t] = check_condition(bases.base[task.stream], bases.next[task.stream], generators, task.slot,
                                             options.float_tolerance, worst[t]);
    }
  });

  for (int j = 0; j < params.M; ++j) {
    NestingResult nest;
    nest.stream = j;
    const auto& lo = bases.base[j];
    const auto& hi = bases.next[j];
    std::vector<int> alpha;
    std::vector<S> s1;
    std::vector<S> s2;
    double w = 0.0;
    for (std::size_t a = 0; a < lo.size() && nest.passed; ++a) {
      lo.indices().digits_at(a, alpha);
      const auto witness = hi.indices().ordinal_of(alpha);
      if (!witness || !columns_match<S>(lo.column(a, s1), hi.column(*witness, s2), options.float_tolerance, w)) {
        nest.passed = false;
        nest.counterexample = alpha;
      }
    }
    worst.push_back(w);
    report.nesting.push_back(std::move(nest));
  }

  report.worst_relative_error = *std::max_element(worst.begin(), worst.end());
  report.passed = std::all_of(report.conditions.begin(), report.conditions.end(), [](const auto& c) { return c.passed; }) &&
                  std::all_of(report.nesting.begin(), report.nesting.end(), [](const auto& n) { return n.passed; });
  return report;
}

#define SIASIM_INSTANTIATE(S)                                                                                       \
  template GeneratorSet<S> extract_generators<S>(std::span<const ProcessedState<S>>);                               \
  template class PrecodingBasis<S>;                                                                                 \
  template PrecodingBasis<S> build_basis<S>(std::shared_ptr<const GeneratorSet<S>>, const SchemeParams&, int, Level, \
                                            const BasisOptions&);                                                   \
  template SchemeBases<S> build_all_bases<S>(std::shared_ptr<const GeneratorSet<S>>, const SchemeParams&,           \
                                             const BasisOptions&);                                                  \
  template AlignmentReport check_alignment<S>(const SchemeBases<S>&, const GeneratorSet<S>&, const SchemeParams&,   \
                                              const AlignmentOptions&);

SIASIM_INSTANTIATE(double)
SIASIM_INSTANTIATE(Complex)
SIASIM_INSTANTIATE(Fp61)
#undef SIASIM_INSTANTIATE

}  // namespace siasim
