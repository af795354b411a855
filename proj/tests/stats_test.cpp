#include "cyberseer/stats.hpp"

#include <gtest/gtest.h>

#include "cyberseer/common.hpp"
#include "oracles.hpp"

using namespace cyberseer;
using namespace cyberseer::stats;

namespace {

std::vector<double> random_sample(rng::Engine& eng, size_t n, double lo = -10.0, double hi = 10.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = eng.uniform(lo, hi);
  return v;
}

// Textbook pooled t statistic, written out independently.
double pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  double na = a.size(), nb = b.size();
  double ma = oracle::mean(a), mb = oracle::mean(b);
  double va = 0.0, vb = 0.0;
  for (double x : a) va += (x - ma) * (x - ma);
  for (double x : b) vb += (x - mb) * (x - mb);
  va /= (na - 1.0);
  vb /= (nb - 1.0);
  double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
  return (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
}

}  // namespace

TEST(IncompleteBeta, UniformCaseIsIdentity) {
  for (double x : {0.0, 0.1, 0.35, 0.5, 0.9, 1.0})
    EXPECT_NEAR(regularized_incomplete_beta(1.0, 1.0, x), x, 1e-14);
}

TEST(IncompleteBeta, SymmetricHalf) {
  for (double a : {0.5, 1.0, 2.5, 7.0})
    EXPECT_NEAR(regularized_incomplete_beta(a, a, 0.5), 0.5, 1e-12);
}

TEST(IncompleteBeta, MatchesQuadrature) {
  EXPECT_NEAR(regularized_incomplete_beta(2.5, 4.0, 0.3), oracle::ibeta(2.5, 4.0, 0.3), 1e-10);
  rng::Engine eng(41);
  for (int trial = 0; trial < 60; ++trial) {
    double a = eng.uniform(1.0, 8.0);
    double b = eng.uniform(1.0, 8.0);
    double x = eng.uniform(0.02, 0.98);
    EXPECT_NEAR(regularized_incomplete_beta(a, b, x), oracle::ibeta(a, b, x), 1e-10)
        << "a=" << a << " b=" << b << " x=" << x;
  }
}

TEST(IncompleteBeta, DomainErrors) {
  EXPECT_THROW(regularized_incomplete_beta(0.0, 1.0, 0.5), Error);
  EXPECT_THROW(regularized_incomplete_beta(1.0, 1.0, 1.5), Error);
}

TEST(UpperGamma, BoundaryValues) {
  EXPECT_DOUBLE_EQ(regularized_upper_gamma(2.0, 0.0), 1.0);
  // Q(1, x) = exp(-x)
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0})
    EXPECT_NEAR(regularized_upper_gamma(1.0, x), std::exp(-x), 1e-12);
}

TEST(UpperGamma, MatchesQuadrature) {
  rng::Engine eng(43);
  for (int trial = 0; trial < 60; ++trial) {
    double s = eng.uniform(0.5, 9.0);
    double x = eng.uniform(0.05, 15.0);
    EXPECT_NEAR(regularized_upper_gamma(s, x), oracle::chi2_p_value(2.0 * x, 2.0 * s), 1e-10)
        << "s=" << s << " x=" << x;
  }
}

TEST(TTest, IdenticalGroups) {
  auto r = t_test_independent({1, 2, 3}, {1, 2, 3});
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.df, 4.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(TTest, MatchesHandFormula) {
  std::vector<double> a = {1, 2, 3, 4}, b = {2, 3, 4, 5};
  auto r = t_test_independent(a, b);
  EXPECT_NEAR(r.statistic, pooled_t(a, b), 1e-12);
  EXPECT_DOUBLE_EQ(r.df, 6.0);
}

TEST(TTest, ZeroVarianceError) {
  try {
    t_test_independent({0, 0, 0}, {1, 1, 1});
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_variance);
  }
}

TEST(TTest, PValueMatchesQuadrature) {
  rng::Engine eng(47);
  for (int trial = 0; trial < 40; ++trial) {
    auto a = random_sample(eng, 3 + eng.below(12));
    auto b = random_sample(eng, 3 + eng.below(12));
    TestResult r;
    try {
      r = t_test_independent(a, b);
    } catch (const Error&) {
      continue;
    }
    EXPECT_NEAR(r.p_value, oracle::t_p_value(r.statistic, r.df), 1e-6);
  }
}

TEST(TTest, AntisymmetricInArguments) {
  rng::Engine eng(53);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_sample(eng, 2 + eng.below(10));
    auto b = random_sample(eng, 2 + eng.below(10));
    auto ab = t_test_independent(a, b);
    auto ba = t_test_independent(b, a);
    EXPECT_DOUBLE_EQ(ab.statistic, -ba.statistic);
    EXPECT_DOUBLE_EQ(ab.p_value, ba.p_value);
  }
}

TEST(TTest, LargerStatisticMeansSmallerP) {
  double df = 9.0;
  double last = 1.1;
  for (double t = 0.0; t < 6.0; t += 0.25) {
    double p = t_two_tailed_p(t, df);
    EXPECT_LT(p, last + 1e-15);
    last = p;
  }
}

TEST(Pearson, IdentityAndAffine) {
  std::vector<double> x = {1, 2, 3, 4, 5};
  auto r1 = pearson(x, x);
  EXPECT_DOUBLE_EQ(r1.statistic, 1.0);
  EXPECT_DOUBLE_EQ(r1.p_value, 0.0);
  std::vector<double> y;
  for (double v : x) y.push_back(-2.0 * v + 3.0);
  auto r2 = pearson(x, y);
  EXPECT_DOUBLE_EQ(r2.statistic, -1.0);
  EXPECT_DOUBLE_EQ(r2.p_value, 0.0);
}

TEST(Pearson, FixtureMatchesQuadrature) {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> y = {1.3, 1.9, 3.4, 3.6, 5.2};
  auto r = pearson(x, y);
  // independent r computation
  double mx = oracle::mean(x), my = oracle::mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  double expected_r = sxy / std::sqrt(sxx * syy);
  EXPECT_NEAR(r.statistic, expected_r, 1e-12);
  double t = expected_r * std::sqrt((5.0 - 2.0) / (1.0 - expected_r * expected_r));
  EXPECT_NEAR(r.p_value, oracle::t_p_value(t, 3.0), 1e-9);
}

TEST(Pearson, ConstantInputIsZeroVariance) {
  try {
    pearson({1, 1, 1}, {1, 2, 3});
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::zero_variance);
  }
}

TEST(Pearson, InvariantUnderPositiveAffineTransforms) {
  rng::Engine eng(59);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 3 + eng.below(20);
    auto x = random_sample(eng, n);
    auto y = random_sample(eng, n);
    TestResult base;
    try {
      base = pearson(x, y);
    } catch (const Error&) {
      continue;
    }
    double scale = eng.uniform(0.1, 5.0), shift = eng.uniform(-10.0, 10.0);
    std::vector<double> xs;
    for (double v : x) xs.push_back(scale * v + shift);
    auto moved = pearson(xs, y);
    EXPECT_NEAR(base.statistic, moved.statistic, 1e-12);
  }
}

TEST(ChiSquare, PerfectIndependence) {
  auto r = chi_square_independence({{10, 10}, {10, 10}});
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.df, 1.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(ChiSquare, MatchesHandComputation) {
  // marginals 25/25, expected 12.5 everywhere
  auto r = chi_square_independence({{20, 5}, {5, 20}});
  double expected = 4.0 * (7.5 * 7.5 / 12.5);
  EXPECT_NEAR(r.statistic, expected, 1e-9);
  EXPECT_NEAR(r.p_value, oracle::chi2_p_value(expected, 1.0), 1e-6);
}

TEST(ChiSquare, ZeroMarginalIsInvalid) {
  try {
    chi_square_independence({{0, 0}, {1, 2}});
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_table);
  }
}

TEST(ChiSquare, InvariantUnderRowAndColumnPermutation) {
  rng::Engine eng(61);
  for (int trial = 0; trial < 100; ++trial) {
    size_t rows = 2 + eng.below(3), cols = 2 + eng.below(3);
    std::vector<std::vector<double>> table(rows, std::vector<double>(cols));
    for (auto& row : table)
      for (auto& v : row) v = 1.0 + static_cast<double>(eng.below(30));
    auto base = chi_square_independence(table);
    std::vector<std::vector<double>> swapped(table);
    std::swap(swapped[0], swapped[rows - 1]);
    for (auto& row : swapped) std::swap(row[0], row[cols - 1]);
    auto moved = chi_square_independence(swapped);
    EXPECT_NEAR(base.statistic, moved.statistic, 1e-9);
    EXPECT_NEAR(base.p_value, moved.p_value, 1e-12);
  }
}

TEST(ChiSquare, PValueMatchesQuadratureOnRandomTables) {
  rng::Engine eng(67);
  for (int trial = 0; trial < 30; ++trial) {
    size_t rows = 2 + eng.below(2), cols = 2 + eng.below(2);
    std::vector<std::vector<double>> table(rows, std::vector<double>(cols));
    for (auto& row : table)
      for (auto& v : row) v = 1.0 + static_cast<double>(eng.below(40));
    auto r = chi_square_independence(table);
    EXPECT_NEAR(r.p_value, oracle::chi2_p_value(r.statistic, r.df), 1e-6);
  }
}

TEST(AllTests, PValuesAlwaysInUnitInterval) {
  rng::Engine eng(71);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_sample(eng, 2 + eng.below(8));
    auto b = random_sample(eng, 2 + eng.below(8));
    try {
      auto r = t_test_independent(a, b);
      EXPECT_GE(r.p_value, 0.0);
      EXPECT_LE(r.p_value, 1.0);
    } catch (const Error&) {
    }
  }
}
