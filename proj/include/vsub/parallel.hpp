#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace vsub {

/// Static block partition over [0, n); each index writes only its own slot,
/// so results do not depend on the thread count.
inline void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 1 || n < 4) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    long lo = n * t / threads, hi = n * (t + 1) / threads;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace vsub
