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

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace siasim {

/**
 * Fixed set of worker threads running statically partitioned loops.
 *
 * parallel_for splits [0, count) into one contiguous chunk per worker; the
 * calling thread takes the first chunk. Partitioning depends only on count and
 * size(), and callers only use it for loops whose iterations write disjoint
 * outputs, so results never depend on scheduling. A parallel_for issued from
 * inside a worker runs inline.
 */
class WorkerPool {
 public:
  using RangeBody = std::function<void(std::size_t begin, std::size_t end)>;

  // workers == 0 selects std::thread::hardware_concurrency().
  explicit WorkerPool(unsigned workers = 0);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  unsigned size() const { return static_cast<unsigned>(threads_.size()) + 1; }

  void parallel_for(std::size_t count, const RangeBody& body);

 private:
  void worker_loop(unsigned index);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const RangeBody* body_ = nullptr;
  std::size_t count_ = 0;
  std::size_t generation_ = 0;
  unsigned pending_ = 0;
  bool stopping_ = false;
  std::exception_ptr error_;
};

// Runs inline when pool is null.
inline void parallel_for(WorkerPool* pool, std::size_t count, const WorkerPool::RangeBody& body) {
  if (pool == nullptr || count < 2) {
    if (count > 0) body(0, count);
    return;
  }
  pool->parallel_for(count, body);
}

}  // namespace siasim
