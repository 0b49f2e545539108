#include "calib/core/parallel.h"

#include <omp.h>

namespace calib {

void SetThreadCount(int threads) {
  if (threads > 0) {
    omp_set_num_threads(threads);
  }
}

int ThreadCount() { return omp_get_max_threads(); }

}  // namespace calib
