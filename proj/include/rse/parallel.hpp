#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rse {

// Worker count used when a caller passes 0.
inline std::size_t default_workers() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs fn(task) for every task in [0, n_tasks) on up to `workers` threads.
// Tasks are handed out dynamically; callers must make each task write to
// disjoint state so the result does not depend on scheduling. The first
// exception thrown by any task is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n_tasks, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = default_workers();
  workers = std::min(workers, n_tasks);
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1, std::memory_order_relaxed);
      if (t >= n_tasks) return;
      try {
        fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_tasks);
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace rse
