#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mvamp {

// Worker count: hardware concurrency, capped by the MVAMP_THREADS env var.
inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("MVAMP_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

// Runs fn(begin, end) over contiguous chunks of [0, count). Chunk boundaries
// depend only on count and the worker cap, so per-chunk work is reproducible.
// Callers must write to disjoint state per index. Nested calls run serially
// instead of oversubscribing.
inline void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& fn,
                         std::int64_t serial_below = 2048) {
  const int workers = static_cast<int>(std::min<std::int64_t>(worker_count(), std::max<std::int64_t>(count, 1)));
  if (workers <= 1 || count < serial_below || detail::inside_parallel_region) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::int64_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&fn, lo, hi] {
      detail::inside_parallel_region = true;
      fn(lo, hi);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace mvamp
