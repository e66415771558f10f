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

#include "siasim/scheme.hpp"

namespace siasim {

template <Scalar S>
std::vector<ProcessedState<S>> process_all_decoders(const ChannelSet<S>& channels, WorkerPool* pool) {
  std::vector<ProcessedState<S>> processed(static_cast<std::size_t>(channels.params.K));
  parallel_for(pool, processed.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) processed[k] = sia_run(stack_decoder(channels, static_cast<int>(k)));
  });
  return processed;
}

template <Scalar S>
Scheme<S> build_scheme(ChannelSet<S> channels, const BasisOptions& options) {
  Scheme<S> scheme;
  scheme.params = channels.params;
  scheme.channels = std::move(channels);
  scheme.processed = process_all_decoders(scheme.channels, options.pool);
  scheme.generators = std::make_shared<const GeneratorSet<S>>(
      extract_generators<S>(std::span<const ProcessedState<S>>(scheme.processed)));
  scheme.bases = build_all_bases(scheme.generators, scheme.params, options);
  return scheme;
}

#define SIASIM_INSTANTIATE(S)                                                                          \
  template std::vector<ProcessedState<S>> process_all_decoders<S>(const ChannelSet<S>&, WorkerPool*); \
  template Scheme<S> build_scheme<S>(ChannelSet<S>, const BasisOptions&);

SIASIM_INSTANTIATE(double)
SIASIM_INSTANTIATE(Complex)
SIASIM_INSTANTIATE(Fp61)
#undef SIASIM_INSTANTIATE

}  // namespace siasim
