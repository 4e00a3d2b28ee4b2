#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace crosslearn {

// Runs f(i) for i in [0, n) on up to n_threads workers. Callers store results
// indexed by i and reduce them in index order afterwards, so the outcome is
// identical no matter how the iterations were scheduled.
template <typename F>
void parallel_for(std::size_t n, int n_threads, F&& f) {
  if (n == 0) return;
  if (n_threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(n_threads), n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        f(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

inline int default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace crosslearn
