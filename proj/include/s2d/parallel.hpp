#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace s2d {

/// Worker count for per-pixel loops. Results never depend on it; each output pixel is
/// written by exactly one worker and computed by the same code path.
struct Parallelism {
  int workers = 1;
};

/// Runs body(row_begin, row_end) over [0, rows) split into contiguous blocks.
inline void parallel_rows(int rows, Parallelism par, const std::function<void(int, int)>& body) {
  const int workers = std::clamp(par.workers, 1, std::max(rows, 1));
  if (workers == 1) {
    body(0, rows);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    const int begin = rows * w / workers;
    const int end = rows * (w + 1) / workers;
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace s2d
