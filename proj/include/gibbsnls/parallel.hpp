#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gibbsnls {

/// Worker count from GIBBSNLS_WORKERS, else hardware concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("GIBBSNLS_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) over `workers` threads with a static
/// contiguous partition. Results must be written to per-index slots so the
/// outcome is independent of the worker count. The first exception thrown
/// by any worker is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  std::vector<std::thread> threads;
  std::exception_ptr error;
  std::mutex error_mutex;
  threads.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    const std::size_t begin = count * t / nthreads;
    const std::size_t end = count * (t + 1) / nthreads;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gibbsnls
