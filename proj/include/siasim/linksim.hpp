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
#include <optional>
#include <vector>

#include "siasim/random.hpp"
#include "siasim/scheme.hpp"

namespace siasim {

inline constexpr std::size_t kDefaultLinkLambdaBound = std::size_t{1} << 10;

// Symbols and transmitted extension vectors of every user for one channel use
// of the extended channel.
template <FloatScalar S>
struct TransmitFrame {
  // symbols[i][j]: the mu_n symbols user i sends on stream j.
  std::vector<std::vector<std::vector<S>>> symbols;
  std::vector<std::vector<S>> x;  // length lambda_n per user
};

template <FloatScalar S>
struct ReceiveFrame {
  std::vector<std::vector<S>> y;  // length lambda_n per receiver
};

struct SubspaceLink {
  int decoder = 0;
  int subspace = 0;
  double rate_bits = 0.0;     // per channel use of the extended channel
  double condition_number = 0.0;
  bool rank_deficient = false;
  double predicted_mse = 0.0;  // zero-forcing error variance per symbol
  double empirical_mse = 0.0;
};

struct SnrPoint {
  double snr = 0.0;  // linear, per extension symbol
  std::vector<double> user_rates;  // bits per extension symbol
  double sum_rate = 0.0;
  std::vector<SubspaceLink> subspaces;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the fit residuals
  std::size_t points = 0;
};

struct RateReport {
  std::vector<SnrPoint> points;
  double target_slope = 0.0;
  std::optional<SlopeFit> fit;  // present when the points allow a fit
};

struct LinkOptions {
  int noise_realizations = 20;
  std::uint64_t seed = 0;
  std::size_t lambda_bound = kDefaultLinkLambdaBound;
  double rank_threshold = 1e-12;  // relative to the largest singular value
  WorkerPool* pool = nullptr;
};

// Precodes the given symbols with unit-norm precoder columns so that the
// expected power per extension symbol equals snr.
template <FloatScalar S>
TransmitFrame<S> make_transmit_frame(const Scheme<S>& scheme, double snr,
                                     std::vector<std::vector<std::vector<S>>> symbols);

template <FloatScalar S>
TransmitFrame<S> random_transmit_frame(const Scheme<S>& scheme, double snr, Rng& rng);

// noise == nullptr transmits noiselessly.
template <FloatScalar S>
ReceiveFrame<S> propagate(const Scheme<S>& scheme, const TransmitFrame<S>& frame, Rng* noise);

// Applies the combining of decoder k and returns subspace `subspace` of it.
template <FloatScalar S>
std::vector<S> combine_subspace(const Scheme<S>& scheme, const ReceiveFrame<S>& frame, int k, int subspace);

template <FloatScalar S>
RateReport run_link(const Scheme<S>& scheme, const std::vector<double>& snr_linear, const LinkOptions& options = {});

// Least squares of sum rate against log2(snr). Needs at least three points with
// positive snr spanning at least 20 dB.
SlopeFit estimate_dof_slope(const std::vector<double>& snr_linear, const std::vector<double>& sum_rates);

struct LeakageProbe {
  double worst_amplitude = 0.0;  // |projected| / |observation|, desired symbols zero
  double worst_energy = 0.0;
  double worst_symbol_sensitivity = 0.0;  // projected change when interferer symbols are redrawn
  bool passed = false;
};

template <FloatScalar S>
LeakageProbe probe_leakage(const Scheme<S>& scheme, std::uint64_t seed, int trials = 4,
                           double amplitude_tolerance = 1e-10);

double db_to_linear(double db);

}  // namespace siasim
