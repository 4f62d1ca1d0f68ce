#pragma once

#include <cstddef>
#include <functional>

namespace qdopt {

// Worker cap: QDOPT_THREADS when set (clamped to [1, 256]), otherwise the
// hardware concurrency.
int thread_budget();

// Runs f(i) for i in [0, n). Work is handed out in fixed-size contiguous
// chunks; callers get determinism by writing results into per-index slots and
// reducing in index order afterwards. The first exception thrown by any
// worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace qdopt
