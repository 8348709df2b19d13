#pragma once

#include <cstddef>
#include <functional>

namespace etv {

// Thread cap: ETVALLOC_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
std::size_t thread_limit();

// Runs body(begin, end) over contiguous chunks of [0, count), one chunk per
// worker. Chunks are disjoint, so bodies that write only their own range
// need no synchronization.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace etv
