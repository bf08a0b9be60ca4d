#pragma once

#include <cstddef>
#include <functional>

namespace kinex {

// Hardware concurrency, capped by the KINEX_THREADS environment variable.
std::size_t worker_count();

// Calls task(k) for k in [0, n) on up to worker_count() threads. Tasks must
// write only to per-index storage; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace kinex
