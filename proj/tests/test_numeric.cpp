#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"

namespace wdiv {
namespace {

using Mat = dense::Matrix<double>;

// Regularized lower incomplete gamma by its power series; fine for the
// moderate arguments a χ² median needs.
double regularized_gamma(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int n = 1; n < 500; ++n) {
    term *= x / (s + n);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(s * std::log(x) - x - std::lgamma(s)) * sum;
}

double chi_squared_median_oracle(unsigned q) {
  double lo = 0;
  double hi = 4.0 * q + 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (regularized_gamma(q / 2.0, mid / 2.0) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Mat random_spd_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Mat a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = normal(rng);
  }
  Mat s = a * a.transpose();
  for (std::size_t i = 0; i < n; ++i) s(i, i) += 0.1;
  return s;
}

TEST(Cholesky, ReconstructsAndSolves) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + t % 6;
    const Mat a = random_spd_matrix(n, rng);
    const auto l = dense::cholesky(a);
    ASSERT_TRUE(l);
    const Mat back = *l * l->transpose();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(back(i, j), a(i, j), 1e-10 * (1 + std::abs(a(i, j))));
    }
    std::vector<double> b(n);
    for (auto& v : b) v = std::normal_distribution<double>()(rng);
    const std::vector<double> x = dense::cholesky_solve<double>(*l, b);
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0;
      for (std::size_t j = 0; j < n; ++j) r += a(i, j) * x[j];
      EXPECT_NEAR(r, b[i], 1e-8);
    }
  }
}

TEST(Cholesky, DiagonalAndRejection) {
  Mat d(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 1;
  const auto l = dense::cholesky(d);
  ASSERT_TRUE(l);
  EXPECT_DOUBLE_EQ((*l)(0, 0), 2);
  EXPECT_DOUBLE_EQ((*l)(1, 1), 1);
  Mat singular(2, 2);
  singular(0, 0) = singular(0, 1) = singular(1, 0) = singular(1, 1) = 1;
  EXPECT_FALSE(dense::cholesky(singular));
  Mat indefinite = Mat::identity(2);
  indefinite(1, 1) = -1;
  EXPECT_FALSE(dense::cholesky(indefinite));
}

TEST(Jacobi, KnownSpectra) {
  Mat d(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 2;
  EXPECT_EQ(dense::symmetric_eigenvalues(d), (std::vector<double>{2, 1}));
  Mat swap(2, 2);
  swap(0, 1) = swap(1, 0) = 1;
  const auto ev = dense::symmetric_eigenvalues(swap);
  EXPECT_NEAR(ev[0], 1, 1e-14);
  EXPECT_NEAR(ev[1], -1, 1e-14);
}

TEST(Jacobi, TraceAndDeterminant) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 50; ++t) {
    const Mat a = random_spd_matrix(3, rng);
    const auto ev = dense::symmetric_eigenvalues(a);
    ASSERT_EQ(ev.size(), 3U);
    EXPECT_GE(ev[0], ev[1]);
    EXPECT_GE(ev[1], ev[2]);
    const double trace = a(0, 0) + a(1, 1) + a(2, 2);
    const double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                       a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                       a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    EXPECT_NEAR(ev[0] + ev[1] + ev[2], trace, 1e-9 * std::abs(trace));
    EXPECT_NEAR(ev[0] * ev[1] * ev[2], det, 1e-9 * std::abs(det));
  }
}

TEST(Jacobi, RejectsAsymmetricInput) {
  Mat a = Mat::identity(2);
  a(0, 1) = 1;
  EXPECT_THROW(dense::symmetric_eigenvalues(a), Error);
}

TEST(Jacobi, WorksInHighPrecision) {
  dense::Matrix<HighPrecision> a(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 2;
  a(0, 1) = a(1, 0) = HighPrecision("1e-30");
  const auto ev = dense::symmetric_eigenvalues(a, HighPrecision("1e-40"));
  EXPECT_LT(abs(ev[0] - ev[1] - HighPrecision("2e-30")), HighPrecision("1e-44"));
}

TEST(Stats, Median) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(median({1, std::numeric_limits<double>::quiet_NaN(), 5}), 3);
  EXPECT_TRUE(std::isnan(median({})));
}

TEST(Stats, LeastSquaresRecoversALine) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const LinearFit f = least_squares(x, y);
  EXPECT_NEAR(f.slope, 2, 1e-12);
  EXPECT_NEAR(f.intercept, 1, 1e-12);
  EXPECT_NEAR(f.slope_stderr, 0, 1e-12);
  const std::vector<double> t{1e2, 1e3, 1e4, 1e5};
  std::vector<double> w;
  for (double v : t) w.push_back(0.5 * v);
  EXPECT_NEAR(log_log_fit(t, w).slope, 1, 1e-12);
  EXPECT_THROW(least_squares(std::vector<double>{1}, std::vector<double>{1}), Error);
}

TEST(Stats, ChiSquaredMedianMatchesAnIndependentOracle) {
  EXPECT_NEAR(chi_squared_median_oracle(1), 0.454936, 1e-6);
  for (unsigned q = 1; q <= 8; ++q) EXPECT_NEAR(chi_squared_median(q), chi_squared_median_oracle(q), 1e-9) << q;
  EXPECT_NEAR(chi_squared_median(2), 2 * std::log(2.0), 1e-12);
}

TEST(Stats, SubstreamsAreReproducibleAndDistinct) {
  auto a = substream(42, 100, 7);
  auto b = substream(42, 100, 7);
  auto c = substream(42, 100, 8);
  auto d = substream(42, 1000, 7);
  const auto first = a();
  EXPECT_EQ(first, b());
  EXPECT_NE(first, c());
  EXPECT_NE(first, d());
}

}  // namespace
}  // namespace wdiv
