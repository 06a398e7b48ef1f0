#pragma once

#include <cstddef>
#include <functional>

namespace qxs {

/// Hardware concurrency, floored at 1.
int default_worker_count();

/// Runs fn(0..n-1) across `workers` threads (workers <= 0 picks the
/// default). Tasks must be independent; each task should derive its own
/// random stream from its index so results do not depend on `workers`.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace qxs
