#pragma once

#include <cstdint>
#include <functional>

namespace robustkern {

// Number of worker threads allowed right now. Resolution order:
//   1. an active ThreadBudgetGuard on this thread,
//   2. the ROBUSTKERN_THREADS environment variable (0 or unset = all cores),
//   3. std::thread::hardware_concurrency().
int effective_thread_budget();

// Scoped override of the thread budget for the current thread. Used by the
// experiment harness to keep inner test runs serial while repetitions run
// in parallel.
class ThreadBudgetGuard {
 public:
  explicit ThreadBudgetGuard(int budget);
  ~ThreadBudgetGuard();
  ThreadBudgetGuard(const ThreadBudgetGuard&) = delete;
  ThreadBudgetGuard& operator=(const ThreadBudgetGuard&) = delete;

 private:
  int previous_;
};

// Runs fn(i) for i in [0, count). Each index is processed exactly once by
// exactly one worker; callers must make fn(i) write only to slot i so that
// results are identical for every thread count.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

}  // namespace robustkern
