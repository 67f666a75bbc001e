#pragma once

#include <cstddef>
#include <functional>

namespace sml {

/// Worker count for batch jobs: min(hardware_concurrency, SML_THREADS) with a
/// floor of 1. SML_THREADS is read once per call so tests can override it.
unsigned worker_count();

/// Runs fn(i) for i in [0, count) on a small thread pool. Items must be
/// independent; results should be written into preallocated slots indexed by i
/// so output order never depends on scheduling. Exceptions from workers are
/// rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace sml
