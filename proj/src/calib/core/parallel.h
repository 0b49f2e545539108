#pragma once

#include <cstdint>

namespace calib {

// Caps the number of OpenMP worker threads for all parallel kernels.
// 0 keeps the OpenMP default.
void SetThreadCount(int threads);
int ThreadCount();

// Data-parallel loop over [begin, end). The body must write only to
// per-index state so that results are identical for any thread count.
template <typename Body>
void ParallelFor(int64_t begin, int64_t end, const Body& body) {
#pragma omp parallel for schedule(static)
  for (int64_t i = begin; i < end; ++i) {
    body(i);
  }
}

}  // namespace calib
