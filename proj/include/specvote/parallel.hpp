#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

#include "specvote/errors.hpp"

namespace specvote {

/// Run fn(index) for index in [0, count) on up to `workers` threads.
/// Indices are claimed from a shared atomic counter, so idle threads
/// steal whatever work is left. fn must not throw; callers that need
/// error reporting should capture failures into per-index slots.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers < 1) throw parameter_error("worker count must be >= 1");
  if (count == 0) return;
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

}  // namespace specvote
