#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace edlab {

// Worker count for data-parallel evaluation: hardware concurrency, capped by
// the EDLAB_THREADS environment variable.
inline int eval_thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* cap = std::getenv("EDLAB_THREADS")) {
    const int c = std::atoi(cap);
    if (c >= 1) n = std::min(n, c);
  }
  return n;
}

// Splits [0, n) into contiguous chunks, one worker thread per chunk. The
// callback must write only to per-index slots so results stay deterministic.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& chunk) {
  const int workers = std::min<std::size_t>(eval_thread_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1 || n < 2) {
    chunk(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t step = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * step;
    if (lo >= n) break;
    const std::size_t hi = std::min(n, lo + step);
    pool.emplace_back([&chunk, lo, hi] { chunk(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace edlab
