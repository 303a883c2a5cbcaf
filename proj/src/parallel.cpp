#include "tailrisk/parallel.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tailrisk {

namespace {
int g_workers = 0;  // 0: OpenMP default
}

int worker_count() {
#ifdef _OPENMP
  return g_workers > 0 ? g_workers : omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int workers) {
  g_workers = std::max(0, workers);
#ifdef _OPENMP
  if (g_workers > 0) omp_set_num_threads(g_workers);
#endif
}

}  // namespace tailrisk
