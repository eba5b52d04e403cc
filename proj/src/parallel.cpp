#include "evoplat/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace evoplat {

namespace {
std::atomic<int> g_thread_cap{0};  // 0 = no override
}

ThreadCapGuard::ThreadCapGuard(int cap) : previous_(g_thread_cap.exchange(cap)) {}
ThreadCapGuard::~ThreadCapGuard() { g_thread_cap.store(previous_); }

int max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("EVOPLAT_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1 && cap < 1024) {
      if (cap < hw) hw = static_cast<int>(cap);
    }
  }
  const int scoped = g_thread_cap.load();
  if (scoped >= 1 && scoped < hw) hw = scoped;
  return hw;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  int threads = max_threads();
  if (threads > n) threads = n;
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error = nullptr;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  // Contiguous blocks; block boundaries depend only on (n, threads).
  int base = n / threads, extra = n % threads, begin = 0;
  std::atomic<int> error_guard{0};
  for (int t = 0; t < threads; ++t) {
    int len = base + (t < extra ? 1 : 0);
    int lo = begin, hi = begin + len;
    begin = hi;
    pool.emplace_back([&, lo, hi]() {
      try {
        for (int i = lo; i < hi; ++i) {
          if (failed.load(std::memory_order_relaxed)) return;
          fn(i);
        }
      } catch (...) {
        if (error_guard.fetch_add(1) == 0) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace evoplat
