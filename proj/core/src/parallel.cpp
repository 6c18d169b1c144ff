#include "robustkern/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace robustkern {

namespace {

thread_local int tls_budget_override = 0;  // 0 = no override

int env_budget() {
  const char* raw = std::getenv("ROBUSTKERN_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || value < 0) return 0;
  return static_cast<int>(value);
}

}  // namespace

int effective_thread_budget() {
  if (tls_budget_override > 0) return tls_budget_override;
  int budget = env_budget();
  if (budget == 0) budget = static_cast<int>(std::thread::hardware_concurrency());
  return budget > 0 ? budget : 1;
}

ThreadBudgetGuard::ThreadBudgetGuard(int budget) : previous_(tls_budget_override) {
  tls_budget_override = budget > 0 ? budget : 1;
}

ThreadBudgetGuard::~ThreadBudgetGuard() { tls_budget_override = previous_; }

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  const int budget = effective_thread_budget();
  const int workers = static_cast<int>(std::min<std::int64_t>(budget, count));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::int64_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    ThreadBudgetGuard serial_inner(1);
    for (;;) {
      const std::int64_t i = cursor.fetch_add(1, std::memory_order_relaxed);
      if (i >= count || failed.load(std::memory_order_relaxed)) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        break;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace robustkern
