#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace grosslab {

// Worker count for data-parallel loops. GROSSLAB_THREADS caps it;
// 0 or unset means use the hardware count.
inline int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const char* env = std::getenv("GROSSLAB_THREADS");
  if (env == nullptr) return hw;
  int n = std::atoi(env);
  if (n <= 0) return hw;
  return n < hw ? n : hw;
}

// Runs fn(i) for i in [0, n). Work items must be independent; results
// must be written to disjoint slots so the schedule cannot affect them.
inline void parallel_for(long long n, const std::function<void(long long)>& fn) {
  int workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (long long i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t]() {
      for (long long i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace grosslab
