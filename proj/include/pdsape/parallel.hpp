#pragma once

#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pdsape {

/// Thread count for a request: 0 means the OpenMP default.
inline int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

/// Runs body(i) for i in [0, n). With threads == 1 this is a plain loop. Each
/// index writes only its own output slot, so results do not depend on the
/// schedule. The exception from the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::int64_t n, int threads, Body&& body) {
  const int t = resolve_threads(threads);
  if (t <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for num_threads(t) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pdsape
