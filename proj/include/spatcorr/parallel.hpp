#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace spatcorr {

/// Runs fn(0..n-1) across num_threads workers. Each index is processed exactly
/// once; callers write results into per-index slots so the outcome does not
/// depend on scheduling. num_threads <= 1 runs inline.
inline void parallel_for(long n, int num_threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  if (num_threads <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::vector<std::thread> workers;
  int count = static_cast<int>(std::min<long>(num_threads, n));
  workers.reserve(count);
  for (int t = 0; t < count; ++t) {
    workers.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        long i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace spatcorr
