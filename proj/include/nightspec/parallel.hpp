#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace nightspec {

// Splits [begin, end) into at most `threads` contiguous chunks and runs
// chunk_fn(lo, hi) on each. Safe only when chunks touch disjoint state; the
// first exception thrown by any chunk is rethrown on the calling thread.
inline void parallel_for(std::size_t begin, std::size_t end, int threads,
                         const std::function<void(std::size_t, std::size_t)>&
                             chunk_fn) {
  const std::size_t total = end > begin ? end - begin : 0;
  if (total == 0) {
    return;
  }
  const std::size_t want = threads > 1 ? static_cast<std::size_t>(threads) : 1;
  const std::size_t n_chunks = std::min(want, total);
  if (n_chunks == 1) {
    chunk_fn(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_chunks);
  const std::size_t step = (total + n_chunks - 1) / n_chunks;
  for (std::size_t i = 0; i < n_chunks; ++i) {
    const std::size_t lo = begin + i * step;
    const std::size_t hi = std::min(lo + step, end);
    pool.emplace_back([&, i, lo, hi] {
      try {
        chunk_fn(lo, hi);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace nightspec
