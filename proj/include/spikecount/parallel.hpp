// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace spikecount {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a numbered work chunk.  Chunk results depend on (seed, index)
// only, never on the thread that ran the chunk.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

// Runs fn(0..chunks-1), splitting chunks over up to `threads` workers.  fn
// must write its result into a per-chunk slot; the caller merges in chunk
// order, which keeps totals independent of the worker count.
inline void parallel_for_chunks(int chunks, int threads, const std::function<void(int)>& fn) {
  if (chunks <= 0) return;
  if (threads < 1) threads = 1;
  threads = std::min(threads, chunks);
  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) fn(c);
    });
  for (auto& th : pool) th.join();
}

}  // namespace spikecount
