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

#include "siasim/engine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "siasim/errors.hpp"

namespace siasim {
namespace {

template <Scalar S>
SubspaceRow<S> combine_rows(const DiagonalOperator<S>& a, const SubspaceRow<S>& x, const DiagonalOperator<S>& b,
                            const SubspaceRow<S>& y) {
  SubspaceRow<S> out;
  out.interferers.reserve(x.interferers.size());
  for (std::size_t i = 0; i < x.interferers.size(); ++i) {
    out.interferers.push_back(diag_linear(a, x.interferers[i], b, y.interferers[i]));
  }
  out.desired = diag_linear(a, x.desired, b, y.desired);
  out.residual = diag_linear(a, x.residual, b, y.residual);
  out.combiner.reserve(x.combiner.size());
  for (std::size_t q = 0; q < x.combiner.size(); ++q) {
    out.combiner.push_back(diag_linear(a, x.combiner[q], b, y.combiner[q]));
  }
  return out;
}

template <Scalar S>
void negate_row(SubspaceRow<S>& row) {
  for (auto& c : row.interferers) c = -c;
  row.desired = -row.desired;
  row.residual = -row.residual;
  for (auto& c : row.combiner) c = -c;
}

template <Scalar S>
struct StepOutcome {
  DecoderState<S> next;
  BlockMatrix<S> transform;
};

// Target j loses interferer (j - D) mod M: the source subspace holding that
// interferer cancels it, which induces the source's next interferer; that one
// is cancelled by the next source, and so on until the source is j's cyclic
// predecessor. Every source is read from the pre-step snapshot.
template <Scalar S>
StepOutcome<S> apply_step(const DecoderState<S>& state, int D) {
  const int M = state.M;
  if (D < 1 || D > M - 1) throw InvalidArgument(fmt::format("SIA step {} out of range [1, {}]", D, M - 1));
  if (state.steps_applied != D - 1) {
    throw InvalidArgument(fmt::format("SIA step {} needs a state after {} steps, got {}", D, D - 1,
                                      state.steps_applied));
  }
  const auto& snapshot = state.rows;
  const auto identity = DiagonalOperator<S>::identity(state.dim);
  const auto zeros = DiagonalOperator<S>::zeros(state.dim);

  StepOutcome<S> out;
  out.next = state;
  out.next.steps_applied = D;
  out.transform.assign(M, std::vector<DiagonalOperator<S>>(M, zeros));

  for (int j = 0; j < M; ++j) {
    SubspaceRow<S> target = snapshot[j];
    std::vector<DiagonalOperator<S>> weights(M, zeros);
    weights[j] = identity;
    int source = wrap_index(j - D, M);
    for (;;) {
      const DiagonalOperator<S>& a = snapshot[source].interferers[source];
      const DiagonalOperator<S> b = target.interferers[source];
      target = combine_rows(a, target, b, snapshot[source]);
      for (int q = 0; q < M; ++q) weights[q] = diag_compose(a, weights[q]);
      weights[source] = weights[source] - b;
      if (wrap_index(source + 1, M) == j) break;
      source = wrap_index(source + 1, M);
    }
    out.next.rows[j] = std::move(target);
    out.transform[j] = std::move(weights);
  }
  return out;
}

template <Scalar S>
DiagonalOperator<S> cofactor(const BlockMatrix<S>& m, std::size_t row, std::vector<bool>& used) {
  const std::size_t n = m.size();
  if (row == n) return DiagonalOperator<S>::identity(m[0][0].dim());
  DiagonalOperator<S> acc = DiagonalOperator<S>::zeros(m[0][0].dim());
  int sign = 1;
  for (std::size_t c = 0; c < n; ++c) {
    if (used[c]) continue;
    used[c] = true;
    const auto term = diag_compose(m[row][c], cofactor(m, row + 1, used));
    used[c] = false;
    acc = sign > 0 ? acc + term : acc - term;
    sign = -sign;
  }
  return acc;
}

template <Scalar S>
BlockMatrix<S> coefficient_matrix(const DecoderState<S>& state) {
  BlockMatrix<S> c(state.M);
  for (int m = 0; m < state.M; ++m) c[m] = state.rows[m].interferers;
  return c;
}

}  // namespace

template <Scalar S>
DecoderState<S> stack_decoder(const ChannelSet<S>& channels, int k) {
  const int K = channels.params.K;
  const int M = channels.params.M;
  if (k < 0 || k >= K) throw InvalidArgument(fmt::format("decoder index {} out of range [0, {})", k, K));

  DecoderState<S> state;
  state.k = k;
  state.M = M;
  state.dim = channels.dim;
  state.receivers = cooperation_set(k, K, M).members;
  state.interferer_order.push_back(wrap_index(k - 1, K));
  for (int i = 1; i < M; ++i) state.interferer_order.push_back(wrap_index(k + i, K));
  state.interferer_order.push_back(wrap_index(k + M, K));

  const auto identity = DiagonalOperator<S>::identity(channels.dim);
  const auto zeros = DiagonalOperator<S>::zeros(channels.dim);
  state.rows.resize(M);
  for (int m = 0; m < M; ++m) {
    const int rx = state.receivers[m];
    auto& row = state.rows[m];
    for (int i = 0; i < M; ++i) row.interferers.push_back(channels(rx, state.interferer_order[i]));
    row.desired = channels(rx, k);
    row.residual = channels(rx, state.interferer_order[M]);
    row.combiner.assign(M, zeros);
    row.combiner[m] = identity;
  }
  return state;
}

template <Scalar S>
DecoderState<S> sia_step(const DecoderState<S>& state, int D) {
  return apply_step(state, D).next;
}

template <Scalar S>
BlockMatrix<S> sia_step_transform(const DecoderState<S>& state, int D) {
  return apply_step(state, D).transform;
}

template <Scalar S>
ProcessedState<S> sia_run(const DecoderState<S>& state) {
  if (state.steps_applied != 0) throw InvalidArgument("sia_run expects a freshly stacked decoder state");
  const int M = state.M;

  ProcessedState<S> out;
  out.state = state;
  for (int D = 1; D <= M - 1; ++D) out.state = sia_step(out.state, D);
  out.step_count = M - 1;

  auto& rows = out.state.rows;
  const DiagonalOperator<S> common = rows[0].interferers[0];
  out.sign_normalization.assign(M, 1);

  if constexpr (ExactScalar<S>) {
    for (int m = 0; m < M; ++m) {
      for (int i = 0; i < M; ++i) {
        if (i != m && !rows[m].interferers[i].is_zero()) {
          throw InternalError(fmt::format("SIA left interferer {} in subspace {} of decoder {}", i, m, state.k));
        }
      }
      if (rows[m].interferers[m] == common) continue;
      if (rows[m].interferers[m] == -common) {
        negate_row(rows[m]);
        out.sign_normalization[m] = -1;
        continue;
      }
      throw InternalError(fmt::format("subspace {} of decoder {} does not share the common coefficient", m, state.k));
    }
  } else {
    double maxmag = 0.0;
    for (const auto& row : rows) {
      for (const auto& c : row.interferers) maxmag = std::max(maxmag, max_magnitude(c));
      maxmag = std::max({maxmag, max_magnitude(row.desired), max_magnitude(row.residual)});
    }
    const double scale = maxmag > 0.0 ? maxmag : 1.0;
    constexpr double kTolerance = 1e-9;
    for (int m = 0; m < M; ++m) {
      for (int i = 0; i < M; ++i) {
        if (i == m) continue;
        const double residue = max_magnitude(rows[m].interferers[i]) / scale;
        out.offdiagonal_residue = std::max(out.offdiagonal_residue, residue);
        if (residue > kTolerance) {
          throw InternalError(fmt::format("SIA left interferer {} in subspace {} of decoder {}", i, m, state.k));
        }
      }
      const double plus = max_magnitude(rows[m].interferers[m] - common) / scale;
      const double minus = max_magnitude(rows[m].interferers[m] + common) / scale;
      const double deviation = std::min(plus, minus);
      out.diagonal_deviation = std::max(out.diagonal_deviation, deviation);
      if (deviation > kTolerance) {
        throw InternalError(fmt::format("subspace {} of decoder {} does not share the common coefficient", m, state.k));
      }
      if (minus < plus) {
        negate_row(rows[m]);
        out.sign_normalization[m] = -1;
      }
      // Equal up to rounding; pin the exact common value.
      rows[m].interferers[m] = common;
    }
  }
  out.Tk = common;
  return out;
}

template <Scalar S>
DiagonalOperator<S> cofactor_determinant(const BlockMatrix<S>& m) {
  if (m.empty()) throw InvalidArgument("determinant of an empty block matrix");
  for (const auto& row : m) {
    if (row.size() != m.size()) throw InvalidArgument("determinant needs a square block matrix");
  }
  if (m.size() > 6) throw InvalidArgument(fmt::format("cofactor expansion limited to 6x6, got {}", m.size()));
  std::vector<bool> used(m.size(), false);
  return cofactor(m, 0, used);
}

template <Scalar S>
CramerReference<S> sia_oracle(const DecoderState<S>& state) {
  const int M = state.M;
  const BlockMatrix<S> c = coefficient_matrix(state);
  CramerReference<S> ref;
  ref.det = cofactor_determinant(c);
  for (int i = 0; i < M; ++i) {
    BlockMatrix<S> with_desired = c;
    BlockMatrix<S> with_residual = c;
    for (int m = 0; m < M; ++m) {
      with_desired[m][i] = state.rows[m].desired;
      with_residual[m][i] = state.rows[m].residual;
    }
    ref.desired_numerators.push_back(cofactor_determinant(with_desired));
    ref.residual_numerators.push_back(cofactor_determinant(with_residual));
  }
  return ref;
}

template <Scalar S>
CramerCheck check_cramer(const ProcessedState<S>& processed, const CramerReference<S>& reference,
                         double float_tolerance) {
  CramerCheck check;
  const auto& rows = processed.state.rows;
  const auto& Tk = processed.Tk;
  const auto& det = reference.det;
  for (std::size_t t = 0; t < Tk.dim(); ++t) {
    if (is_zero(det[t]) || is_zero(Tk[t])) {
      ++check.positions_skipped;
      continue;
    }
    ++check.positions_checked;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::pair<S, S> sides[2] = {
          {rows[i].desired[t] * det[t], reference.desired_numerators[i][t] * Tk[t]},
          {rows[i].residual[t] * det[t], reference.residual_numerators[i][t] * Tk[t]},
      };
      for (int which = 0; which < 2; ++which) {
        const auto& [lhs, rhs] = sides[which];
        bool ok = true;
        if constexpr (ExactScalar<S>) {
          ok = lhs == rhs;
        } else {
          const double scale = std::max(ScalarTraits<S>::magnitude(lhs), ScalarTraits<S>::magnitude(rhs));
          const double err = scale > 0.0 ? ScalarTraits<S>::magnitude(lhs - rhs) / scale : 0.0;
          check.worst_relative_error = std::max(check.worst_relative_error, err);
          ok = err <= float_tolerance;
        }
        if (!ok && check.passed) {
          check.passed = false;
          check.first_failure = fmt::format("decoder {} subspace {} position {} ({} coefficient)", processed.state.k, i,
                                            t, which == 0 ? "desired" : "residual");
        }
      }
    }
  }
  return check;
}

#define SIASIM_INSTANTIATE(S)                                                                          \
  template DecoderState<S> stack_decoder<S>(const ChannelSet<S>&, int);                                \
  template DecoderState<S> sia_step<S>(const DecoderState<S>&, int);                                   \
  template BlockMatrix<S> sia_step_transform<S>(const DecoderState<S>&, int);                          \
  template ProcessedState<S> sia_run<S>(const DecoderState<S>&);                                       \
  template DiagonalOperator<S> cofactor_determinant<S>(const BlockMatrix<S>&);                         \
  template CramerReference<S> sia_oracle<S>(const DecoderState<S>&);                                   \
  template CramerCheck check_cramer<S>(const ProcessedState<S>&, const CramerReference<S>&, double);

SIASIM_INSTANTIATE(double)
SIASIM_INSTANTIATE(Complex)
SIASIM_INSTANTIATE(Fp61)
#undef SIASIM_INSTANTIATE

}  // namespace siasim
