#pragma once

#include <cstddef>
#include <functional>

namespace subibp {

// Resolve a requested worker count: <= 0 means hardware concurrency, and the
// SUBIBP_THREADS environment variable overrides the default.
int resolve_threads(int requested);

// Run fn(i) for i in [0, count) on `threads` workers over contiguous index
// ranges. Caller-provided fn must write only to per-index slots; with that
// contract the output is identical for every thread count.
void parallel_for_index(std::size_t count, int threads,
                        const std::function<void(std::size_t)>& fn);

}  // namespace subibp
