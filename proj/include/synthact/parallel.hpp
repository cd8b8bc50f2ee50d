#pragma once

#include <cstddef>
#include <functional>

namespace synthact {

// Runs fn(i) for i in [0, n) on up to `jobs` worker threads (0 = hardware
// concurrency). Callers are responsible for making results independent of
// scheduling order; indices are claimed from a shared atomic counter.
// Exceptions thrown by fn are captured and the first one is rethrown after
// all workers join.
void parallel_for(std::size_t n, unsigned jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace synthact
