#pragma once

#include <cstddef>
#include <functional>

namespace detex {

// Thread cap: min(hardware_concurrency, EXPONENT_THREADS if set). Read once.
int max_threads();

// Runs fn(i) for i in [0, n). Work is split by index so results written
// per-index are deterministic regardless of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace detex
