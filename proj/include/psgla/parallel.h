#pragma once

#include <functional>

#include "psgla/types.h"

namespace psgla {

// Runs fn(i) for i in [0, count). Under kParallel iterations are spread over
// OpenMP threads. If any iteration throws, the exception from the lowest index
// is rethrown with "item <i>: " prepended to its message; the error category
// (InputError, NumericError, ...) is preserved.
void parallel_for(long count, Execution exec, const std::function<void(long)>& fn);

// OpenMP thread count for subsequent parallel regions; n <= 0 keeps the default.
void set_thread_count(int n);
int thread_count();

}  // namespace psgla
