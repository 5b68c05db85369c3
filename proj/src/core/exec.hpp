#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace fibermc {

// Fixed chunk size for ensemble reductions. Paths are accumulated
// sequentially inside a chunk and chunk results are merged in chunk order,
// so the final sums are bit-identical for any worker count.
inline constexpr int64_t kChunk = 1024;

template <class Acc, class PathFn>
Acc run_chunked(int64_t n_paths, int workers, PathFn&& fn) {
  int64_t n_chunks = (n_paths + kChunk - 1) / kChunk;
  std::vector<Acc> per_chunk(static_cast<size_t>(n_chunks));
  std::atomic<int64_t> next{0};
  auto work = [&]() {
    for (;;) {
      int64_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) break;
      Acc acc;
      int64_t lo = c * kChunk;
      int64_t hi = std::min(n_paths, lo + kChunk);
      for (int64_t i = lo; i < hi; ++i) fn(acc, i);
      per_chunk[static_cast<size_t>(c)] = std::move(acc);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  Acc total;
  for (auto& a : per_chunk) total.merge(a);
  return total;
}

}  // namespace fibermc
