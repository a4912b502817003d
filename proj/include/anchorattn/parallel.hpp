#pragma once

#include <cstddef>
#include <functional>

namespace anchorattn {

/// Worker cap: ANCHOR_ATTN_THREADS when set (>= 1), else the hardware
/// concurrency.
std::size_t max_threads();

/// Runs fn(0) .. fn(count - 1) across up to max_threads() workers. Results
/// must be written to caller-owned slots indexed by the argument, so the
/// outcome does not depend on scheduling. The first exception, if any, is
/// rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace anchorattn
