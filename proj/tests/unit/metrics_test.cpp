#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vcasir/metrics.hpp"

using namespace vcasir;

TEST(Metrics, SmallSwap) {
  const std::vector<double> a{1, 2, 3}, b{1, 3, 2};
  const auto m = correlation_metrics(a, b);
  EXPECT_NEAR(m.srcc, 0.5, 1e-15);
  EXPECT_NEAR(m.krcc, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.plcc, 0.5, 1e-15);
  EXPECT_NEAR(m.rmse, std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(Metrics, AllPermutationsOfFive) {
  std::vector<double> base{1, 2, 3, 4, 5};
  std::vector<double> p = base;
  int count = 0;
  do {
    const auto m = correlation_metrics(p, base);
    EXPECT_EQ(m.krcc, oracle::kendall_pairs(p, base));
    EXPECT_EQ(m.srcc, oracle::spearman_rank_pearson(p, base));
    EXPECT_NEAR(m.srcc, oracle::spearman_d2(p, base), 1e-15);
    ++count;
  } while (std::next_permutation(p.begin(), p.end()));
  EXPECT_EQ(count, 120);
}

TEST(Metrics, RandomVectorsAgainstOracles) {
  std::mt19937 gen(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(10), b(10);
    for (auto& v : a) v = n(gen);
    for (auto& v : b) v = n(gen);
    const auto m = correlation_metrics(a, b);
    EXPECT_NEAR(m.krcc, oracle::kendall_pairs(a, b), 1e-12);
    EXPECT_NEAR(m.srcc, oracle::spearman_rank_pearson(a, b), 1e-12);
    EXPECT_NEAR(m.srcc, oracle::spearman_d2(a, b), 1e-12);
  }
}

TEST(Metrics, TiesUseAverageRanks) {
  EXPECT_EQ(average_ranks(std::vector<double>{3, 1, 3, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
  const std::vector<double> a{1, 1, 2, 3}, b{1, 2, 2, 3};
  // Tau-b: 4 concordant of 6 pairs, one tie on each side.
  EXPECT_NEAR(*kendall_tau_b(a, b), 4.0 / 5.0, 1e-15);
  EXPECT_NEAR(correlation_metrics(a, b).krcc, oracle::kendall_pairs(a, b), 1e-15);
  EXPECT_NEAR(correlation_metrics(a, b).srcc, oracle::spearman_rank_pearson(a, b), 1e-15);
}

TEST(Metrics, Invariances) {
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  std::vector<double> a(15), b(15);
  for (auto& v : a) v = u(gen);
  for (auto& v : b) v = u(gen);
  const auto m = correlation_metrics(a, b);
  std::vector<double> affine(a), monotone(a);
  for (auto& v : affine) v = 3.0 * v - 7.0;
  for (auto& v : monotone) v = std::exp(v);
  const auto ma = correlation_metrics(affine, b);
  EXPECT_NEAR(ma.plcc, m.plcc, 1e-12);
  const auto mm = correlation_metrics(monotone, b);
  EXPECT_EQ(mm.srcc, m.srcc);
  EXPECT_EQ(mm.krcc, m.krcc);
  EXPECT_NEAR(correlation_metrics(b, a).plcc, m.plcc, 1e-12);
  const auto self = correlation_metrics(a, a);
  EXPECT_EQ(self.rmse, 0.0);
  EXPECT_NEAR(self.plcc, 1.0, 1e-12);
  EXPECT_EQ(self.krcc, 1.0);
}

TEST(Metrics, ZeroVarianceStillReportsRmse) {
  try {
    correlation_metrics(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3});
    FAIL() << "expected an undefined correlation";
  } catch (const UndefinedCorrelationError& e) {
    EXPECT_NEAR(e.rmse(), std::sqrt(2.0 / 3.0), 1e-15);
  }
}

TEST(Metrics, InputErrors) {
  EXPECT_THROW(correlation_metrics(std::vector<double>{1, 2}, std::vector<double>{1}), InputError);
  EXPECT_THROW(correlation_metrics(std::vector<double>{1}, std::vector<double>{1}), InputError);
  EXPECT_THROW(correlation_metrics(std::vector<double>{1, NAN}, std::vector<double>{1, 2}), DataError);
}
