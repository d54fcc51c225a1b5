#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace diffu {

/// Number of worker threads used by parallel_for. Defaults to the
/// DIFFU_THREADS environment variable, else hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over a static partition of [0, n). Exceptions from
/// workers are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Evaluates fn(i) for every index and returns the results in index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = fn(i);
  });
  return out;
}

/// Pairwise (tree) summation. Fixed association order, so the result is
/// independent of how the inputs were produced.
double pairwise_sum(std::span<const double> values);

struct MeanStd {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(n)
};

/// Mean and standard error (unbiased sample variance / n) with pairwise sums.
MeanStd mean_and_stderr(std::span<const double> values);

}  // namespace diffu
