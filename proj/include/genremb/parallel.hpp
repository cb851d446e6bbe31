#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace genremb::detail {

inline std::size_t worker_count(std::size_t n, unsigned threads) {
  return std::max<std::size_t>(1, std::min<std::size_t>(threads == 0 ? 1 : threads, n));
}

// Runs body(begin, end, worker) over [0, n) split into contiguous chunks,
// one per worker. The first exception (by worker index) is rethrown.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = worker_count(n, threads);
  if (workers == 1) {
    body(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, begin, end, w] {
        try {
          body(begin, end, w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace genremb::detail
