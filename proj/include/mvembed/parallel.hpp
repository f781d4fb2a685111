#pragma once

#include <cstddef>
#include <functional>

namespace mvembed {

/// Worker count: MVEMBED_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) across worker threads. Iterations must
/// be independent; the first exception thrown by any iteration is rethrown
/// after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mvembed
