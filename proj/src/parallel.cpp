#include "lithium/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lithium {

void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& body) {
  if (exec == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

std::size_t find_first_index(std::size_t n, Execution exec,
                             const std::function<bool(std::size_t)>& pred) {
  if (exec == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i)
      if (pred(i)) return i;
    return n;
  }
  std::atomic<std::size_t> best{n};
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    auto idx = static_cast<std::size_t>(i);
    if (idx >= best.load(std::memory_order_relaxed)) continue;
    if (pred(idx)) {
      std::size_t cur = best.load();
      while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
      }
    }
  }
  return best.load();
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace lithium
