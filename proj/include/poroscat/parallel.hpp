#pragma once

#include <cstddef>
#include <functional>

namespace poroscat {

/// Number of workers for a requested count; 0 means all hardware threads.
int resolve_threads(int requested);

/// Calls fn(begin, end) on contiguous, statically partitioned ranges of
/// [0, n). Results never depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace poroscat
