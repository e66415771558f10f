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

#include "siasim/channel.hpp"

#include "siasim/errors.hpp"
#include "siasim/random.hpp"

namespace siasim {

template <Scalar S>
ChannelSet<S> sample_channels(const SchemeParams& params, std::uint64_t seed, std::size_t dim) {
  if (dim == 0) throw InvalidArgument("extension length must be positive");
  if (dim > params.materialization_bound) {
    throw ResourceLimit(fmt::format("extension length {} exceeds the materialization bound {}", dim,
                                    params.materialization_bound));
  }
  ChannelSet<S> set;
  set.params = params;
  set.dim = dim;
  set.seed = seed;
  set.links.reserve(static_cast<std::size_t>(params.K) * params.K);
  for (int rx = 0; rx < params.K; ++rx) {
    for (int tx = 0; tx < params.K; ++tx) {
      Rng rng(derive_seed(seed, {0x6368616eULL, static_cast<std::uint64_t>(rx), static_cast<std::uint64_t>(tx)}));
      std::vector<S> entries(dim);
      for (auto& e : entries) e = sample_generic<S>(rng);
      set.links.emplace_back(std::move(entries));
    }
  }
  return set;
}

template <Scalar S>
ChannelSet<S> sample_channels(const SchemeParams& params, std::uint64_t seed) {
  return sample_channels<S>(params, seed, params.extension_length());
}

template <Scalar S>
ChannelSet<S> identity_channels(const SchemeParams& params, std::size_t dim) {
  ChannelSet<S> set;
  set.params = params;
  set.dim = dim;
  set.links.assign(static_cast<std::size_t>(params.K) * params.K, DiagonalOperator<S>::identity(dim));
  return set;
}

#define SIASIM_INSTANTIATE(S)                                                                   \
  template ChannelSet<S> sample_channels<S>(const SchemeParams&, std::uint64_t);                \
  template ChannelSet<S> sample_channels<S>(const SchemeParams&, std::uint64_t, std::size_t);   \
  template ChannelSet<S> identity_channels<S>(const SchemeParams&, std::size_t);

SIASIM_INSTANTIATE(double)
SIASIM_INSTANTIATE(Complex)
SIASIM_INSTANTIATE(Fp61)
#undef SIASIM_INSTANTIATE

}  // namespace siasim
