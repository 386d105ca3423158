#include "slipfsi/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace slipfsi {

int thread_count() {
  static const int n = [] {
    const char* env = std::getenv("SLIPFSI_THREADS");
    if (env == nullptr) return 1;
    const int v = std::atoi(env);
    return std::clamp(v, 1, 256);
  }();
  return n;
}

void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
  const int n = end - begin;
  const int workers = std::min(thread_count(), std::max(n, 1));
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + w * chunk;
    const int hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace slipfsi
