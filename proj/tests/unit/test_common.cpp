#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "diffu/common/dual.hpp"
#include "diffu/common/parallel.hpp"
#include "diffu/common/rng.hpp"

using namespace diffu;

namespace {

// Restores the global thread count when a test changes it.
struct ThreadGuard {
  std::size_t saved = thread_count();
  ~ThreadGuard() { set_thread_count(saved); }
};

}  // namespace

TEST(CounterRng, SameStreamSameValues) {
  CounterRng a(7, StreamTag::kSample, 3);
  CounterRng b(7, StreamTag::kSample, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, StreamsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t idx = 0; idx < 50; ++idx) first.insert(CounterRng(7, StreamTag::kSample, idx).next_u64());
  first.insert(CounterRng(7, StreamTag::kProbe, 0).next_u64());
  first.insert(CounterRng(8, StreamTag::kSample, 0).next_u64());
  EXPECT_EQ(first.size(), 52u);
}

TEST(CounterRng, UniformOpenInterval) {
  CounterRng r(1, StreamTag::kUser, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(2, StreamTag::kUser, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(CounterRng, BelowIsUnbiasedAndInRange) {
  CounterRng r(3, StreamTag::kUser, 0);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 5.0 * std::sqrt(n / 7.0));
}

TEST(CounterRng, RademacherBalanced) {
  CounterRng r(4, StreamTag::kProbe, 0);
  int plus = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = r.rademacher();
    ASSERT_TRUE(v == 1.0 || v == -1.0);
    plus += v > 0;
  }
  EXPECT_NEAR(plus, 5000, 300);
}

TEST(PairwiseSum, MatchesExactSumOfIntegers) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(PairwiseSum, BetterThanNaiveOnSmallIncrements) {
  std::vector<double> v(1 << 20, 0.1);
  const double exact = 0.1 * static_cast<double>(v.size());
  EXPECT_NEAR(pairwise_sum(v), exact, 1e-9);
}

TEST(MeanAndStderr, KnownValues) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const MeanStd m = mean_and_stderr(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  // unbiased variance 5/3, divided by n = 4
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  ThreadGuard g;
  for (std::size_t t : {1u, 2u, 3u, 8u}) {
    set_thread_count(t);
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(ParallelFor, RethrowsWorkerExceptions) {
  ThreadGuard g;
  set_thread_count(4);
  EXPECT_THROW(parallel_for(100,
                            [](std::size_t b, std::size_t e) {
                              for (std::size_t i = b; i < e; ++i)
                                if (i == 57) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(ParallelMap, ResultIndependentOfThreadCount) {
  ThreadGuard g;
  auto run = [] {
    auto v = parallel_map<double>(5000, [](std::size_t i) {
      CounterRng r(11, StreamTag::kSample, i);
      return r.normal();
    });
    return pairwise_sum(v);
  };
  set_thread_count(1);
  const double a = run();
  set_thread_count(5);
  const double b = run();
  EXPECT_EQ(a, b);
}

TEST(Dual, FirstDerivatives) {
  using D = Dual<double>;
  const D x(0.7, 1.0);
  EXPECT_NEAR(sin(x).d, std::cos(0.7), 1e-15);
  EXPECT_NEAR(exp(x).d, std::exp(0.7), 1e-15);
  EXPECT_NEAR(log(x).d, 1.0 / 0.7, 1e-15);
  EXPECT_NEAR(tanh(x).d, 1.0 - std::tanh(0.7) * std::tanh(0.7), 1e-15);
  EXPECT_NEAR(erf(x).d, 2.0 / std::sqrt(M_PI) * std::exp(-0.49), 1e-15);
  EXPECT_NEAR((x * x / (x + D(1.0))).d, (0.49 + 1.4) / (1.7 * 1.7), 1e-15);
}

TEST(Dual, NestedGivesSecondDerivative) {
  using DD = Dual<Dual<double>>;
  // f(x) = x^3 sin(x); f'' = 6x sin x + 6x^2 cos x - x^3 sin x
  const double x0 = 0.4;
  const DD x(Dual<double>(x0, 1.0), Dual<double>(1.0, 0.0));
  const DD f = x * x * x * sin(x);
  const double expected = 6 * x0 * std::sin(x0) + 6 * x0 * x0 * std::cos(x0) - x0 * x0 * x0 * std::sin(x0);
  EXPECT_NEAR(f.d.d, expected, 1e-14);
}
