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
#include <optional>
#include <string>
#include <vector>

#include "siasim/channel.hpp"
#include "siasim/diagonal.hpp"

namespace siasim {

/**
 * One cooperating receive subspace of a decoder, written as coefficients on
 * each transmitted signal plus the combination of raw receive signals that
 * produced it.
 */
template <Scalar S>
struct SubspaceRow {
  std::vector<DiagonalOperator<S>> interferers;  // coefficient on isolated interferer i
  DiagonalOperator<S> desired;
  DiagonalOperator<S> residual;
  // This row equals sum_q combiner[q] ∘ Y_{receivers[q]}.
  std::vector<DiagonalOperator<S>> combiner;
};

/**
 * Stacked receive signals of the decoder for message k.
 *
 * Row m is the signal of receiver receivers[m]. Isolated interferers are
 * users k-1, k+1, ..., k+M-1 (mod K) in that order; user k+M is the residual
 * interferer whose coefficients the precoders align.
 */
template <Scalar S>
struct DecoderState {
  int k = 0;
  int M = 0;
  std::size_t dim = 0;
  std::vector<int> receivers;
  std::vector<int> interferer_order;  // M isolated users, then the residual user
  std::vector<SubspaceRow<S>> rows;
  int steps_applied = 0;

  const DiagonalOperator<S>& C(int m, int i) const { return rows[m].interferers[i]; }
  const DiagonalOperator<S>& g(int m) const { return rows[m].desired; }
  const DiagonalOperator<S>& r(int m) const { return rows[m].residual; }
};

template <Scalar S>
struct ProcessedState {
  DecoderState<S> state;
  DiagonalOperator<S> Tk;          // common coefficient of every isolated interferer
  int step_count = 0;
  std::vector<int> sign_normalization;  // +1 / -1 applied per subspace after the last step
  // Float rings only: largest |C[m][m] - Tk| before snapping the diagonal to
  // Tk, and largest off-diagonal magnitude, both relative to the largest
  // processed coefficient magnitude. Zero for exact rings.
  double diagonal_deviation = 0.0;
  double offdiagonal_residue = 0.0;
};

// Per-step transform: new_row[j] = sum_q transform[j][q] ∘ old_row[q].
template <Scalar S>
using BlockMatrix = std::vector<std::vector<DiagonalOperator<S>>>;

template <Scalar S>
DecoderState<S> stack_decoder(const ChannelSet<S>& channels, int k);

// Step D (1-based, 1 <= D <= M-1) of successive interference alignment. The
// state must already reflect steps 1..D-1.
template <Scalar S>
DecoderState<S> sia_step(const DecoderState<S>& state, int D);

// The block transform step D applies, built from the same snapshot.
template <Scalar S>
BlockMatrix<S> sia_step_transform(const DecoderState<S>& state, int D);

// All M-1 steps, sign normalization and invariant checks. Throws
// InternalError if the zero structure or common diagonal does not hold.
template <Scalar S>
ProcessedState<S> sia_run(const DecoderState<S>& state);

// Cramer reference for the processed form, by cofactor expansion (M <= 6).
template <Scalar S>
struct CramerReference {
  DiagonalOperator<S> det;
  std::vector<DiagonalOperator<S>> desired_numerators;
  std::vector<DiagonalOperator<S>> residual_numerators;
};

template <Scalar S>
CramerReference<S> sia_oracle(const DecoderState<S>& state);

// Determinant over the diagonal ring by cofactor expansion along row 0.
template <Scalar S>
DiagonalOperator<S> cofactor_determinant(const BlockMatrix<S>& m);

struct CramerCheck {
  std::size_t positions_checked = 0;
  std::size_t positions_skipped = 0;  // det(t) == 0 or Tk(t) == 0
  bool passed = true;
  double worst_relative_error = 0.0;  // floats only
  std::optional<std::string> first_failure;
};

// Compares processed/Tk with reference/det position by position (by
// cross-multiplication); exact over fields, relative tolerance over floats.
template <Scalar S>
CramerCheck check_cramer(const ProcessedState<S>& processed, const CramerReference<S>& reference,
                         double float_tolerance = 1e-8);

}  // namespace siasim
