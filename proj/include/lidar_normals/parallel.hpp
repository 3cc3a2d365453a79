#pragma once

#include <cstddef>
#include <vector>

namespace lidar_normals {

/// Worker count used by every parallel loop in the library. Zero or negative
/// restores the OpenMP default (all cores).
void set_thread_count(int n);
int thread_count();

/// Fixed partition size for reductions. Partial sums are formed per chunk and
/// added in chunk order, so results do not depend on the worker count.
inline constexpr std::size_t kReduceChunk = 4096;

/// Runs fn(i) for i in [0, n) across workers.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

/// Deterministic sum of fn(i) over [0, n).
template <typename Fn>
double parallel_sum(std::size_t n, Fn&& fn) {
  const std::size_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kReduceChunk;
    const std::size_t end = begin + kReduceChunk < n ? begin + kReduceChunk : n;
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += fn(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace lidar_normals
