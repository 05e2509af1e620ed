#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace diffstiff {

/// min(requested, DIFFSTIFF_THREADS) when the variable is set, at least 1.
int worker_count(int requested);

/// Calls fn(i) for i in [0, n) on up to `threads` workers using a static
/// block partition. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace diffstiff
