#pragma once

#include <cstddef>
#include <functional>

namespace scoped {

// Worker cap from SCOPED_THREADS, falling back to the hardware thread count.
std::size_t default_workers();

// Runs body(i) for i in [0, n) over `workers` threads in contiguous chunks.
// Bodies must write only to slots owned by their index. The first exception
// thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace scoped
