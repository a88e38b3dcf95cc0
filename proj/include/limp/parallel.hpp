#pragma once
// Deterministic parallel helpers. Work is split into a FIXED number of chunks
// (independent of the thread count); chunk results are combined in chunk-index
// order. The serial reference path runs the identical chunked code without
// OpenMP, so serial and parallel executions are bit-identical for any thread
// count.

#include <algorithm>
#include <utility>

#ifdef LIMP_HAS_OPENMP
#include <omp.h>
#endif

namespace limp::par {

// Global switch between the OpenMP path and the serial reference path.
inline bool& enabled() {
  static bool on = true;
  return on;
}

constexpr int kChunks = 16;

inline int num_chunks(int n) { return std::min(n, kChunks); }

inline std::pair<int, int> chunk_range(int n, int chunk, int chunks) {
  const int base = n / chunks, rem = n % chunks;
  const int begin = chunk * base + std::min(chunk, rem);
  const int len = base + (chunk < rem ? 1 : 0);
  return {begin, begin + len};
}

// f(chunk_index, begin, end) over a fixed chunking of [0, n).
template <class F>
void for_chunks(int n, F&& f) {
  if (n <= 0) return;
  const int chunks = num_chunks(n);
#ifdef LIMP_HAS_OPENMP
  if (enabled()) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) {
      auto [b, e] = chunk_range(n, c, chunks);
      f(c, b, e);
    }
    return;
  }
#endif
  for (int c = 0; c < chunks; ++c) {
    auto [b, e] = chunk_range(n, c, chunks);
    f(c, b, e);
  }
}

}  // namespace limp::par
