#include <gtest/gtest.h>

#include <cstring>

#include "convextest/gaussian.h"
#include "convextest/monte_carlo.h"
#include "oracles.h"

using namespace convextest;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

// Detector of the one-dimensional box example: closest pair (-1, 1).
AffineDetector<double> box_detector() { return {vec({2.0}), 0.0}; }

}  // namespace

TEST(MonteCarlo, MatchesExactErrorOfOneDimensionalExample) {
  const double exact = static_cast<double>(oracle::phi_upper(1.0L));
  const auto h0 = mc_error(box_detector(), vec({-1}), MatrixXd::Identity(1, 1), -1, 200000, 42);
  EXPECT_LE(std::abs(h0.estimate - exact), 3 * h0.std_error);
  const auto h1 = mc_error(box_detector(), vec({1}), MatrixXd::Identity(1, 1), 1, 200000, 43);
  EXPECT_LE(std::abs(h1.estimate - exact), 3 * h1.std_error);
  EXPECT_EQ(h0.n_samples, 200000);
  EXPECT_NEAR(h0.std_error, std::sqrt(h0.estimate * (1 - h0.estimate) / 200000), 1e-15);
}

TEST(MonteCarlo, FarInsideNullHasNoErrors) {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto e = mc_error(box_detector(), vec({-100}), MatrixXd::Identity(1, 1), -1, 50000, seed);
    EXPECT_EQ(e.estimate, 0.0);
    EXPECT_EQ(e.errors, 0);
  }
}

TEST(MonteCarlo, SameSeedSameBits) {
  const auto a = mc_error(box_detector(), vec({-1}), MatrixXd::Identity(1, 1), -1, 100001, 7);
  const auto b = mc_error(box_detector(), vec({-1}), MatrixXd::Identity(1, 1), -1, 100001, 7);
  EXPECT_EQ(a.errors, b.errors);
  EXPECT_EQ(std::memcmp(&a.estimate, &b.estimate, sizeof(double)), 0);
  const auto c = mc_error(box_detector(), vec({-1}), MatrixXd::Identity(1, 1), -1, 100001, 8);
  EXPECT_NE(a.errors, c.errors);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeEstimate) {
  MatrixXd sigma(3, 3);
  sigma << 2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 0.5;
  const AffineDetector<double> det{vec({1, -2, 0.5}), 0.25};
  McOptions opts;
  opts.chunk_size = 1000;
  opts.threads = 1;
  const auto seq = mc_error(det, vec({0.1, 0.2, 0.3}), sigma, 1, 25500, 3, opts);
  for (unsigned t : {2u, 3u, 8u}) {
    opts.threads = t;
    const auto par = mc_error(det, vec({0.1, 0.2, 0.3}), sigma, 1, 25500, 3, opts);
    EXPECT_EQ(par.errors, seq.errors) << t << " threads";
  }
}

TEST(MonteCarlo, CorrelatedCovarianceAgreesWithExactError) {
  // For X ~ N(theta, S), h(X) is N(h(theta), w^T S w).
  MatrixXd sigma(2, 2);
  sigma << 1.5, 0.6, 0.6, 0.8;
  const AffineDetector<double> det{vec({0.7, -1.1}), 0.2};
  const VectorXd theta = vec({0.5, 1.0});
  const double z = det(VectorRef<double>(theta)) / std::sqrt(det.w.dot(sigma * det.w));
  const double exact = static_cast<double>(oracle::phi(-z));
  const auto e = mc_error(det, theta, sigma, 1, 200000, 11);
  EXPECT_LE(std::abs(e.estimate - exact), 3.5 * e.std_error);
}

TEST(MonteCarlo, RejectsBadArguments) {
  const MatrixXd one = MatrixXd::Identity(1, 1);
  EXPECT_THROW(mc_error(box_detector(), vec({0}), one, 0, 10, 0), InvalidArgument);
  EXPECT_THROW(mc_error(box_detector(), vec({0}), one, 1, 0, 0), InvalidArgument);
  EXPECT_THROW(mc_error(box_detector(), vec({0, 0}), one, 1, 10, 0), DimensionMismatch);
  McOptions opts;
  opts.chunk_size = 0;
  EXPECT_THROW(mc_error(box_detector(), vec({0}), one, 1, 10, 0, opts), InvalidArgument);
}
