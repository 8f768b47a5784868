#include <gtest/gtest.h>

#include <cmath>

#include "convextest/normal.h"
#include "oracles.h"

using namespace convextest;

TEST(NormalCdf, Examples) {
  EXPECT_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(40.0), 1.0, 1e-15);
  EXPECT_NEAR(normal_cdf(1.959963985), 0.975, 1e-9);
}

TEST(NormalCdf, MatchesReferenceOnGrid) {
  for (double z = -38.0; z <= 38.0; z += 0.01) {
    const double ref = static_cast<double>(oracle::phi(z));
    EXPECT_NEAR(normal_cdf(z), ref, 1e-12) << "z=" << z;
  }
}

TEST(NormalCdf, UpperTailHasRelativeAccuracy) {
  // The relative condition number of the upper tail grows like z^2.
  for (double z = 0.0; z <= 37.0; z += 0.05) {
    const double ref = static_cast<double>(oracle::phi_upper(z));
    EXPECT_NEAR(normal_sf(z), ref, 1e-14 * (1 + z * z) * ref) << "z=" << z;
  }
}

TEST(NormalCdf, Monotone) {
  double prev = normal_cdf(-40.0);
  for (double z = -40.0; z <= 40.0; z += 1e-3) {
    const double v = normal_cdf(z);
    ASSERT_GE(v, prev) << "z=" << z;
    prev = v;
  }
}

TEST(NormalCdf, Symmetry) {
  for (double z = -8.0; z <= 8.0; z += 0.125) EXPECT_NEAR(normal_cdf(z) + normal_cdf(-z), 1.0, 1e-15);
}

TEST(NormalCdf, Saturates) {
  EXPECT_EQ(normal_cdf(-1e3), 0.0);
  EXPECT_EQ(normal_cdf(1e3), 1.0);
  EXPECT_EQ(normal_sf(1e3), 0.0);
}

TEST(Erfc, ReferenceValues) {
  EXPECT_NEAR(erfc_cody(0.0), 1.0, 1e-16);
  for (double x = -6.0; x <= 26.0; x += 0.0625)
    EXPECT_NEAR(erfc_cody(x), static_cast<double>(std::erfc(static_cast<long double>(x))),
                2e-15 * std::max(1.0, static_cast<double>(std::erfc(static_cast<long double>(x)))))
        << "x=" << x;
}
