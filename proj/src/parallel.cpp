#include "sslab/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sslab {

namespace {
int g_threads = 0;
}

void set_threads(int n) {
  g_threads = n;
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

int threads() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sslab
