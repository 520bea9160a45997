#pragma once

#include <cstddef>
#include <functional>

namespace ocfk {

// Process-wide worker count for data-parallel loops. Defaults to 1 so every
// run is bitwise deterministic unless the caller opts in to more threads.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into fixed-size chunks (independent of the thread count) and
// runs fn(begin, end) for each. Chunk boundaries never depend on scheduling,
// so writes to disjoint output slots give identical results at any level of
// parallelism.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace ocfk
