#pragma once

#include <cstddef>
#include <functional>

namespace uicast {

/// Runs fn(i) for i in [0, n) across at most `threads` workers. Each task
/// must write only to caller-owned slots indexed by i, so results do not
/// depend on the thread count. The first exception thrown by any task is
/// rethrown on the calling thread after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Hardware concurrency, at least 1.
int default_threads();

}  // namespace uicast
