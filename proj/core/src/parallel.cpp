#include "sdfilter/parallel.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sdfilter {

void set_thread_count(int threads) {
#ifdef _OPENMP
  omp_set_num_threads(threads > 0 ? threads : omp_get_num_procs());
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sdfilter
