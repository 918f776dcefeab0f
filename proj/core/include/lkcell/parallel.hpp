#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace lkcell {

// Runs fn over [0, n) split into contiguous chunks, one per worker thread.
// Chunk boundaries depend only on n and the thread count, and chunks write
// disjoint outputs, so results are identical to a serial run.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = hw == 0 ? 1 : hw;
  if (workers > n) workers = n;
  if (workers <= 1 || n < 4) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    if (begin >= n) break;
    std::size_t end = begin + chunk < n ? begin + chunk : n;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lkcell
