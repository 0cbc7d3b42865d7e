#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

// Deterministic fork-join helper. Work is split into fixed-size blocks whose
// results are indexed by block id; callers reduce over blocks in order, so
// outputs do not depend on the number of worker threads.
namespace rflab {

inline int& thread_count_ref() {
  static int count = [] {
    if (const char* env = std::getenv("REIFENBERG_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
  }();
  return count;
}

inline int thread_count() { return thread_count_ref(); }
inline void set_thread_count(int n) {
  if (n > 0) thread_count_ref() = n;
}

// f(block_index, begin, end) must only write to state owned by block_index.
template <class F>
void parallel_blocks(std::int64_t n_items, std::int64_t block_size, F&& f) {
  if (n_items <= 0) return;
  std::int64_t n_blocks = (n_items + block_size - 1) / block_size;
  int workers = std::min<std::int64_t>(thread_count(), n_blocks);
  if (workers <= 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b)
      f(b, b * block_size, std::min(n_items, (b + 1) * block_size));
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::int64_t b = next.fetch_add(1);
      if (b >= n_blocks) break;
      f(b, b * block_size, std::min(n_items, (b + 1) * block_size));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace rflab
