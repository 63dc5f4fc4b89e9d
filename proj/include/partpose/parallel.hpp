// Copyright 2026 The PartPose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace partpose {

/// Number of workers to use for a requested budget; 0 means "all hardware
/// threads".
inline unsigned resolve_threads(unsigned budget) {
  if (budget != 0) return budget;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(begin, end) over [0, n) in chunks on up to `threads` workers.
/// Chunks are claimed dynamically, so callers must only write to outputs
/// indexed by the loop variable; results are then independent of scheduling.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body, std::size_t chunk = 0) {
  if (n == 0) return;
  threads = resolve_threads(threads);
  if (chunk == 0) chunk = std::max<std::size_t>(1, n / (static_cast<std::size_t>(threads) * 16));
  if (threads == 1 || n <= chunk) {
    body(std::size_t{0}, n);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= n) break;
        body(begin, std::min(n, begin + chunk));
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next.store(n);
    }
  };
  const unsigned spawned = static_cast<unsigned>(
      std::min<std::size_t>(threads, (n + chunk - 1) / chunk));
  std::vector<std::jthread> pool;
  pool.reserve(spawned - 1);
  for (unsigned t = 1; t < spawned; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace partpose
