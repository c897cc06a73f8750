#pragma once

#include <cstddef>
#include <functional>

namespace ballistic {

/// Worker count: BALLISTIC_THREADS if set and positive, otherwise all cores.
std::size_t thread_count();

/// Runs body(i) for i in [0, count). Iterations are split into contiguous
/// blocks, one per worker; body must only write to per-index storage.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ballistic
