#pragma once

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blvm {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// parallel loop over [begin, end)
template <typename F>
void parallel_for(std::int64_t begin, std::int64_t end, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::int64_t i = begin; i < end; ++i) f(i);
}

// Deterministic blocked map-reduce: items [0, n) are cut into fixed-size
// blocks, each block produces a partial of type P in parallel, and partials
// are folded sequentially in block order. Results are bit-identical for any
// thread count because the summation order never depends on the schedule.
template <typename P, typename BlockFn, typename FoldFn>
P blocked_reduce(std::int64_t n, std::int64_t block_size, const P& init, BlockFn&& block_fn,
                 FoldFn&& fold_fn) {
  std::int64_t n_blocks = (n + block_size - 1) / block_size;
  std::vector<P> partials(static_cast<std::size_t>(n_blocks), init);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    std::int64_t lo = b * block_size;
    std::int64_t hi = lo + block_size < n ? lo + block_size : n;
    block_fn(partials[static_cast<std::size_t>(b)], lo, hi);
  }
  P total = init;
  for (std::int64_t b = 0; b < n_blocks; ++b) fold_fn(total, partials[static_cast<std::size_t>(b)]);
  return total;
}

}  // namespace blvm
