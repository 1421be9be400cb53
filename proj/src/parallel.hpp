#pragma once

#include <cstddef>
#include <functional>

namespace dbo {

// Worker count used by parallel_for. Resolution order: explicit set_threads,
// then the DBO_ROM_THREADS environment variable, else 1.
void set_threads(int n);
int thread_count();

// Runs fn(begin, end) over [0, n) split into fixed-size blocks. The block
// partition depends only on n and block_size, never on the worker count, so
// any reduction that combines per-block results in block order is
// reproducible across thread counts.
void parallel_for_blocked(std::size_t n, std::size_t block_size,
                          const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace dbo
