#pragma once
// Row-parallel loops over grid lattices. OpenMP when available, with a serial
// path kept bit-identical for testing: the per-row work is the same closure,
// and all reductions combine one partial per row in fixed row order, so the
// result does not depend on the thread count.

#include <vector>

namespace fbflow::par {

// Process-wide switch; defaults to true when compiled with OpenMP.
bool& parallel_enabled();

// True when the library was compiled with OpenMP support.
bool compiled_with_openmp();

namespace detail {
void run_rows_parallel(int nrows, void* ctx, void (*body)(void*, int));
}

template <class F>
void for_rows(int nrows, F&& body) {
  if (parallel_enabled()) {
    detail::run_rows_parallel(nrows, &body, [](void* ctx, int j) {
      (*static_cast<std::remove_reference_t<F>*>(ctx))(j);
    });
    return;
  }
  for (int j = 0; j < nrows; ++j) body(j);
}

// Deterministic reduction: each row produces one partial (accumulated serially
// within the row by the caller); partials are summed in row order.
template <class F>
double sum_rows(int nrows, F&& row_sum) {
  std::vector<double> partial(static_cast<size_t>(nrows), 0.0);
  for_rows(nrows, [&](int j) { partial[static_cast<size_t>(j)] = row_sum(j); });
  double s = 0.0;
  for (int j = 0; j < nrows; ++j) s += partial[static_cast<size_t>(j)];
  return s;
}

}  // namespace fbflow::par
