#pragma once

#include <cstddef>
#include <functional>

namespace negvol {

/// Worker count from NEGVOL_THREADS (0 or unset = hardware concurrency).
unsigned thread_count();

/// Runs body(i) for i in [begin, end) across worker threads. Each index is
/// visited exactly once; callers must only write state owned by that index,
/// which keeps results independent of scheduling.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace negvol
