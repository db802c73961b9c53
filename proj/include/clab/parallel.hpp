#ifndef CLAB_PARALLEL_HPP
#define CLAB_PARALLEL_HPP

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace clab {

// Worker-pool size: CLAB_THREADS if set, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("CLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n) across the pool. Callers aggregate by index,
// so results are deterministic regardless of scheduling.
inline void parallel_for(long long n, const std::function<void(long long)>& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (long long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (long long i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace clab

#endif
