#pragma once

#include <cstddef>
#include <functional>

namespace nlgcl {

/// Process-wide worker count used by row-parallel kernels (default 1).
void set_num_threads(int threads);
int num_threads();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is visited
/// exactly once by exactly one worker, so row-independent kernels stay
/// bit-reproducible regardless of the thread count.
void parallel_for_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace nlgcl
