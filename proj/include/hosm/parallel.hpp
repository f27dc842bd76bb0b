#pragma once

#include <cstdlib>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hosm {

// Every parallel kernel in this project also has a serial path selected by
// Exec::serial; tests assert both produce bit-identical results. Reductions
// are never done inside the parallel region: workers write to disjoint slots
// and the caller combines them in a fixed order.
enum class Exec { serial, parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int thread_index() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

// Honors HOSM_SERIAL=1 so any run can be forced onto the reference path.
inline Exec default_exec() {
  const char* s = std::getenv("HOSM_SERIAL");
  if (s != nullptr && s[0] == '1') return Exec::serial;
#ifdef _OPENMP
  return Exec::parallel;
#else
  return Exec::serial;
#endif
}

template <typename F>
void parallel_for(Exec exec, int n, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)exec;
#endif
  for (int i = 0; i < n; ++i) body(i);
}

}  // namespace hosm
