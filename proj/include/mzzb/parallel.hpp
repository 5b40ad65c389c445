#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mzzb {

/// Worker count from MZZB_WORKERS, else hardware concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("MZZB_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (...) {
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Runs body(i) for i in [0, n) on `workers` threads. Work items are claimed
/// dynamically; callers write results into per-index slots so the outcome
/// does not depend on scheduling. The first exception thrown is rethrown.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const std::size_t count = std::min(workers, n);
  std::vector<std::thread> threads;
  threads.reserve(count - 1);
  for (std::size_t t = 1; t < count; ++t) threads.emplace_back(run);
  run();
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mzzb
