#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "copula_forge/bell.hpp"

using namespace copula_forge;

TEST(Bell, AllOnesGivesStirlingNumbers) {
  // B_{n,k}(1, 1, ...) = S(n, k)
  const std::vector<double> ones(8, 1.0);
  const BellTable b(ones, 6);
  EXPECT_EQ(b(6, 1), 1.0);
  EXPECT_EQ(b(6, 2), 31.0);
  EXPECT_EQ(b(6, 3), 90.0);
  EXPECT_EQ(b(6, 4), 65.0);
  EXPECT_EQ(b(6, 5), 15.0);
  EXPECT_EQ(b(6, 6), 1.0);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(3, 0), 0.0);
}

TEST(Bell, KnownPolynomial) {
  // B_{4,2} = 4 x1 x3 + 3 x2^2
  const std::vector<double> x = {2.0, 3.0, 5.0, 7.0};
  const BellTable b(x, 4);
  EXPECT_DOUBLE_EQ(b(4, 2), 4 * 2.0 * 5.0 + 3 * 9.0);
}

TEST(Bell, PartialMatchesFiniteDifference) {
  std::vector<double> x = {0.7, -1.3, 2.1, 0.4, -0.9, 1.6};
  const int n = 6;
  const BellTable b(x, n);
  for (int k = 1; k <= n; ++k)
    for (int m = 1; m <= n - k + 1; ++m) {
      std::vector<double> xp = x, xm = x;
      const double h = 1e-6;
      xp[m - 1] += h;
      xm[m - 1] -= h;
      const double fd = (BellTable(xp, n)(n, k) - BellTable(xm, n)(n, k)) / (2 * h);
      EXPECT_NEAR(b.partial(n, k, m), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "k=" << k << " m=" << m;
    }
}

TEST(Bell, FaaDiBrunoOnExpOfSine) {
  // f = exp, g = sin at x = 0.4: derivatives of exp(sin x) by an independent series.
  const double x = 0.4;
  const double g[4] = {std::cos(x), -std::sin(x), -std::cos(x), std::sin(x)};
  const double e = std::exp(std::sin(x));
  const double outer[4] = {e, e, e, e};
  // Closed forms of d^n/dx^n exp(sin x)
  const double c = std::cos(x), s = std::sin(x);
  const double d1 = e * c;
  const double d2 = e * (c * c - s);
  const double d3 = e * (c * c * c - 3 * s * c - c);
  EXPECT_NEAR(faa_di_bruno(outer, g, 1), d1, 1e-14);
  EXPECT_NEAR(faa_di_bruno(outer, g, 2), d2, 1e-14);
  EXPECT_NEAR(faa_di_bruno(outer, g, 3), d3, 1e-14);
}

TEST(Bell, Binomial) {
  EXPECT_EQ(binomial(5, 2), 10.0);
  EXPECT_EQ(binomial(8, 0), 1.0);
  EXPECT_EQ(binomial(3, 4), 0.0);
}
