#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace lobeforge {

// Runs fn(begin, end) over [0, n) split into fixed-size chunks. The chunk
// grid is independent of the thread count and workers only write to slots
// owned by their chunk, so results are bitwise identical for any n_threads.
inline constexpr int kParallelChunk = 256;

inline void parallel_chunks(int n, int n_threads,
                            const std::function<void(int, int)>& fn) {
  constexpr int kChunk = kParallelChunk;
  if (n <= 0) return;
  int n_chunks = (n + kChunk - 1) / kChunk;
  if (n_threads <= 1 || n_chunks <= 1) {
    for (int c = 0; c < n_chunks; ++c) fn(c * kChunk, std::min(n, (c + 1) * kChunk));
    return;
  }
  int workers = std::min(n_threads, n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next_chunk{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int c = next_chunk.fetch_add(1);
        if (c >= n_chunks) break;
        int begin = c * kChunk;
        int end = std::min(n, begin + kChunk);
        fn(begin, end);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lobeforge
