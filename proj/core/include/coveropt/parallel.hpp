#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace coveropt {

// Worker count: COVEROPT_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1). Read on every call.
std::size_t thread_limit();

// Splits [0, n) into contiguous blocks and runs body(begin, end) on each,
// one block per worker. Callers write only to disjoint, index-addressed
// outputs, so results do not depend on the worker count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_block = 64) {
  if (n == 0) return;
  const std::size_t workers =
      std::clamp<std::size_t>(n / std::max<std::size_t>(min_block, 1), 1, thread_limit());
  if (workers == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace coveropt
