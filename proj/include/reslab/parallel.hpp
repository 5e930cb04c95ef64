#pragma once

#include <cstddef>
#include <functional>

namespace reslab {

// Worker count: RESLAB_THREADS when set (>= 1), else hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is written by exactly one worker,
// so results stored per index are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace reslab
