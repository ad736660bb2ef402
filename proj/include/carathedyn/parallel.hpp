#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cdyn {

// Worker cap: CARATHEDYN_THREADS if set, else hardware concurrency, in 1..16.
inline int worker_count() {
  if (const char* env = std::getenv("CARATHEDYN_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return std::min(n, 16);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return std::max(1u, std::min(hc, 8u));
}

// Runs fn(i) for i in [0, n); results must be written to index i of a
// pre-sized buffer by the caller's closure, which keeps reduction order
// deterministic.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cdyn
