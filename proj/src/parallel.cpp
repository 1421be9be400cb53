#include "parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dbo {

namespace {
int g_threads = 0;  // 0 = unresolved

int env_threads() {
  const char* s = std::getenv("DBO_ROM_THREADS");
  if (!s || !*s) return 1;
  const long v = std::strtol(s, nullptr, 10);
  return v >= 1 ? static_cast<int>(v) : 1;
}
}  // namespace

void set_threads(int n) { g_threads = n >= 1 ? n : 1; }

int thread_count() {
  if (g_threads >= 1) return g_threads;
  return env_threads();
}

void parallel_for_blocked(std::size_t n, std::size_t block_size,
                          const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  const int workers = thread_count();
  if (workers <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t lo = b * block_size;
      const std::size_t hi = lo + block_size < n ? lo + block_size : n;
      fn(b, lo, hi);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      const std::size_t lo = b * block_size;
      const std::size_t hi = lo + block_size < n ? lo + block_size : n;
      try {
        fn(b, lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t spawn = static_cast<std::size_t>(workers) < n_blocks
                                ? static_cast<std::size_t>(workers)
                                : n_blocks;
  pool.reserve(spawn);
  for (std::size_t i = 0; i < spawn; ++i) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dbo
