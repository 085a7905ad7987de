#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lqc::cli {

/// out[i] = f(i) for i < n on at most `jobs` threads. Results land by index,
/// so the output does not depend on scheduling. The first exception wins.
template <class T, class F> std::vector<T> parallel_map(std::size_t n, std::size_t jobs, F f) {
  std::vector<T> out(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(jobs, n); ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            out[i] = f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error)
              error = std::current_exception();
            next = n;
          }
        }
      });
  }
  if (error)
    std::rethrow_exception(error);
  return out;
}

} // namespace lqc::cli
