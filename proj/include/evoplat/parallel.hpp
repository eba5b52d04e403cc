#pragma once

#include <functional>

namespace evoplat {

// Worker count: min(hardware_concurrency, EVOPLAT_THREADS if set). At least 1.
int max_threads();

// Runs fn(0..n-1) across up to max_threads() workers in contiguous blocks.
// fn must only touch its own slot; with that contract the result is
// independent of the schedule. Exceptions are rethrown on the caller thread.
void parallel_for(int n, const std::function<void(int)>& fn);

// Caps max_threads() for the guard's lifetime (timing runs need exactly one
// worker). Not reentrancy-safe across overlapping guards on different values.
class ThreadCapGuard {
 public:
  explicit ThreadCapGuard(int cap);
  ~ThreadCapGuard();
  ThreadCapGuard(const ThreadCapGuard&) = delete;
  ThreadCapGuard& operator=(const ThreadCapGuard&) = delete;

 private:
  int previous_;
};

}  // namespace evoplat
