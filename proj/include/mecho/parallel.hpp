#pragma once

#include <functional>

namespace mecho {

/// Number of worker threads used by parallel_for. 1 means strictly
/// sequential execution in index order.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n). Work items must not share mutable state;
/// every caller writes to disjoint outputs, so results do not depend on the
/// thread count.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace mecho
