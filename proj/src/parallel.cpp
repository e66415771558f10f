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

#include "siasim/parallel.hpp"

#include <algorithm>

namespace siasim {
namespace {

thread_local bool tls_in_worker = false;

std::pair<std::size_t, std::size_t> chunk(std::size_t count, unsigned parts, unsigned index) {
  const std::size_t base = count / parts;
  const std::size_t extra = count % parts;
  const std::size_t begin = index * base + std::min<std::size_t>(index, extra);
  return {begin, begin + base + (index < extra ? 1 : 0)};
}

}  // namespace

WorkerPool::WorkerPool(unsigned workers) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  threads_.reserve(workers - 1);
  for (unsigned i = 1; i < workers; ++i) threads_.emplace_back([this, i] { worker_loop(i); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::parallel_for(std::size_t count, const RangeBody& body) {
  if (count == 0) return;
  if (threads_.empty() || tls_in_worker || count < 2) {
    body(0, count);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    body_ = &body;
    count_ = count;
    pending_ = static_cast<unsigned>(threads_.size());
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();

  std::exception_ptr local;
  const auto [b, e] = chunk(count, size(), 0);
  tls_in_worker = true;
  try {
    if (b < e) body(b, e);
  } catch (...) {
    local = std::current_exception();
  }
  tls_in_worker = false;

  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  body_ = nullptr;
  if (local) std::rethrow_exception(local);
  if (error_) std::rethrow_exception(error_);
}

void WorkerPool::worker_loop(unsigned index) {
  tls_in_worker = true;
  std::size_t seen = 0;
  for (;;) {
    const RangeBody* body = nullptr;
    std::size_t count = 0;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      body = body_;
      count = count_;
    }
    const auto [b, e] = chunk(count, size(), index);
    std::exception_ptr err;
    try {
      if (b < e) (*body)(b, e);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (err && !error_) error_ = err;
      --pending_;
    }
    done_cv_.notify_all();
  }
}

}  // namespace siasim
