#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace mintime {

// Runs fn(i) for i in [0, n). Work items must be independent and write only
// to their own output slot; results are then identical for any thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t workers =
      std::min<std::size_t>(n, hw == 0 ? 1 : static_cast<std::size_t>(hw));
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([=, &fn] {
      // Strided assignment balances workloads that grow with the index.
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mintime
