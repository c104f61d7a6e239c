#pragma once

#include <cstddef>
#include <functional>

namespace regseg {

// Worker count: hardware concurrency, capped by REGIME_SEG_THREADS when set.
unsigned thread_count();

// Runs body(i) for i in [0, n). Iterations must write to disjoint outputs;
// callers assemble results by index so output never depends on scheduling.
// The first exception thrown by any iteration is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace regseg
