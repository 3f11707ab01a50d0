#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qmcl {

/// Runs fn(i) for i in [0, n) across hardware threads. Each index is visited
/// exactly once; callers write results to disjoint slots so the output does
/// not depend on scheduling. The first exception thrown by any worker is
/// rethrown on the calling thread.
namespace detail {
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Nested calls from inside a worker run inline on that worker.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, n);
  if (workers <= 1 || detail::in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::in_parallel_region = true;
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace qmcl
