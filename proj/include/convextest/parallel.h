#ifndef CONVEXTEST_PARALLEL_H
#define CONVEXTEST_PARALLEL_H

#include <cstddef>
#include <functional>

namespace convextest {

/// Worker count: CONVEXTEST_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
unsigned default_thread_count();

/// Runs task(i) for i in [0, n) on up to `threads` workers (0 means
/// default_thread_count()). Tasks must write to disjoint outputs. The first
/// exception thrown by a task is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace convextest

#endif  // CONVEXTEST_PARALLEL_H
