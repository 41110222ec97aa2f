#pragma once

#include <cstddef>
#include <functional>

namespace spw {

// Worker cap from the SPW_THREADS environment variable; 1 when unset or invalid.
[[nodiscard]] int thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index is
// visited exactly once; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spw
