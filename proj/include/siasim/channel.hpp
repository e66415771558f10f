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

#include "siasim/diagonal.hpp"
#include "siasim/params.hpp"

namespace siasim {

/**
 * One realization of the fully connected K-user channel over the symbol
 * extension: links(rx, tx) is the diagonal operator from transmitter tx to
 * receiver rx. Every module may read every link (global CSI).
 */
template <Scalar S>
struct ChannelSet {
  SchemeParams params;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<DiagonalOperator<S>> links;  // K*K, row-major in (rx, tx)

  int users() const { return params.K; }
  const DiagonalOperator<S>& operator()(int rx, int tx) const { return links[static_cast<std::size_t>(rx * params.K + tx)]; }
  DiagonalOperator<S>& operator()(int rx, int tx) { return links[static_cast<std::size_t>(rx * params.K + tx)]; }
};

// Channels of length lambda_n; throws ResourceLimit past the bound.
template <Scalar S>
ChannelSet<S> sample_channels(const SchemeParams& params, std::uint64_t seed);

// Channels with an explicit extension length, for checks (like SIA) whose
// structure does not depend on lambda_n.
template <Scalar S>
ChannelSet<S> sample_channels(const SchemeParams& params, std::uint64_t seed, std::size_t dim);

// Every link the identity operator; a fully degenerate diagnostic channel.
template <Scalar S>
ChannelSet<S> identity_channels(const SchemeParams& params, std::size_t dim);

}  // namespace siasim
