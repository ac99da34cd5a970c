#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace hjb::detail {

/// Runs fn(i) for i in [0, n). Each index writes only its own outputs, so
/// results are identical for every thread count.
template <typename Fn>
void parallel_for(std::int64_t n, int n_threads, Fn&& fn) {
  if (n <= 0) return;
  if (n_threads <= 1 || n < 2 * n_threads) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min<std::int64_t>(n_threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hjb::detail
