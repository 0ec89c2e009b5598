// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace nepspace {

/// Thread cap for internal parallelism. NEPSPACE_THREADS overrides the
/// hardware default; values < 1 fall back to 1.
inline int max_threads() {
  static const int cached = [] {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("NEPSPACE_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) n = static_cast<int>(std::min<long>(v, 256));
      if (end != env && v < 1) n = 1;
    }
    return n;
  }();
  return cached;
}

/// Runs fn(i) for i in [0, count). Work items must be independent; results
/// must be written to disjoint slots so that aggregation order stays fixed.
inline void parallel_for(long count, const std::function<void(long)>& fn) {
  int nthreads = static_cast<int>(std::min<long>(max_threads(), count));
  if (nthreads <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (long i = t; i < count; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace nepspace
