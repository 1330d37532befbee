#pragma once

// Deterministic path-parallel execution: work is split into contiguous index
// chunks, workers write into disjoint preallocated slots, and any reduction
// happens sequentially afterwards. Results are invariant to the thread count.

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace theston {

// Calls fn(begin, end) on disjoint subranges of [0, n) from `threads` workers.
inline void parallel_chunks(std::int64_t n, int threads,
                            const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  if (threads <= 1) {
    fn(0, n);
    return;
  }
  int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
  std::int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    std::int64_t begin = w * chunk;
    std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace theston
