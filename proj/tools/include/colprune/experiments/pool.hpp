#pragma once

#include <cstddef>
#include <functional>

namespace colprune::experiments {

/// Runs task(0) ... task(count - 1) on up to `threads` worker threads.
/// Tasks must write only to their own output slot; the first exception thrown
/// by any task is rethrown after all workers have joined.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace colprune::experiments
