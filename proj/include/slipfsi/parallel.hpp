#pragma once

#include <functional>

namespace slipfsi {

/// Data-parallel width, read once from SLIPFSI_THREADS (default 1).
int thread_count();

/// Calls fn(i) for i in [begin, end), split into contiguous chunks across
/// thread_count() workers. fn must not write outside its own index.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace slipfsi
