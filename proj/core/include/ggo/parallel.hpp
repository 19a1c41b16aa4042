#pragma once

#include <cstddef>
#include <functional>

namespace ggo {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// executed exactly once; callers store results by index so output order
/// never depends on completion order. The first exception thrown by any
/// body is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// `requested` if positive, otherwise the hardware concurrency (at least 1).
int resolve_threads(int requested);

}  // namespace ggo
