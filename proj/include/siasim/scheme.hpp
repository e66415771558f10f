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

#include <memory>
#include <vector>

#include "siasim/channel.hpp"
#include "siasim/engine.hpp"
#include "siasim/precoding.hpp"

namespace siasim {

// Everything downstream of one channel realization: processed decoders,
// generators and both precoder levels for every stream.
template <Scalar S>
struct Scheme {
  SchemeParams params;
  ChannelSet<S> channels;
  std::vector<ProcessedState<S>> processed;  // indexed by decoder k
  std::shared_ptr<const GeneratorSet<S>> generators;
  SchemeBases<S> bases;
};

template <Scalar S>
std::vector<ProcessedState<S>> process_all_decoders(const ChannelSet<S>& channels, WorkerPool* pool = nullptr);

template <Scalar S>
Scheme<S> build_scheme(ChannelSet<S> channels, const BasisOptions& options = {});

}  // namespace siasim
