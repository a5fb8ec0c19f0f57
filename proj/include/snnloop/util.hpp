#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace snnloop {

// Runs fn(i) for i in [0, count) and collects results in index order, so
// multi-threaded runs merge deterministically. fn must be safe to call
// concurrently for distinct i.
template <typename T, typename Fn>
std::vector<T> map_indexed(int count, int jobs, Fn&& fn) {
  std::vector<T> results(static_cast<std::size_t>(count));
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) {
      results[static_cast<std::size_t>(i)] = fn(i);
    }
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        results[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(jobs, count);
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace snnloop
