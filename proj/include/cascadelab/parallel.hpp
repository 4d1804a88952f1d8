#pragma once

#include <cstddef>
#include <functional>

namespace cascadelab {

// Worker count for `jobs` independent tasks; requested = 0 means hardware concurrency.
unsigned worker_count(unsigned requested, std::size_t jobs);

// Calls body(i) for i in [0, n) on a pool of worker threads. Indices are
// handed out in increasing order; the first exception thrown stops further
// dispatch and is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace cascadelab
