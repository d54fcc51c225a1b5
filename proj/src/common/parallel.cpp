#include "diffu/common/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace diffu {
namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("DIFFU_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::atomic<std::size_t>& threads_setting() {
  static std::atomic<std::size_t> n{default_threads()};
  return n;
}

double pairwise_rec(const double* p, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_rec(p, half) + pairwise_rec(p + half, n - half);
}

}  // namespace

std::size_t thread_count() { return threads_setting().load(); }

void set_thread_count(std::size_t n) { threads_setting().store(std::max<std::size_t>(1, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        body(b, e);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double pairwise_sum(std::span<const double> values) { return pairwise_rec(values.data(), values.size()); }

MeanStd mean_and_stderr(std::span<const double> values) {
  MeanStd r;
  const std::size_t n = values.size();
  if (n == 0) return r;
  r.mean = pairwise_sum(values) / static_cast<double>(n);
  if (n < 2) return r;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - r.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  r.std_error = std::sqrt(var / static_cast<double>(n));
  return r;
}

}  // namespace diffu
