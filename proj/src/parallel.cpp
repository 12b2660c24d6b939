#include "fbflow/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fbflow::par {

bool& parallel_enabled() {
#ifdef _OPENMP
  static bool enabled = true;
#else
  static bool enabled = false;
#endif
  return enabled;
}

bool compiled_with_openmp() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

namespace detail {

void run_rows_parallel(int nrows, void* ctx, void (*body)(void*, int)) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int j = 0; j < nrows; ++j) body(ctx, j);
#else
  for (int j = 0; j < nrows; ++j) body(ctx, j);
#endif
}

}  // namespace detail
}  // namespace fbflow::par
