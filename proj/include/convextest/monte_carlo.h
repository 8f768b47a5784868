#ifndef CONVEXTEST_MONTE_CARLO_H
#define CONVEXTEST_MONTE_CARLO_H

#include <cstddef>
#include <cstdint>

#include "convextest/gaussian.h"

namespace convextest {

struct McOptions {
  /// Samples per substream. Substream k is seeded from (seed, k), so the
  /// estimate depends on (seed, n_samples, chunk_size) but not on `threads`.
  std::int64_t chunk_size = 1 << 16;
  unsigned threads = 0;
};

struct McEstimate {
  double estimate;   // empirical P(T(X) != label)
  double std_error;  // sqrt(p (1 - p) / n)
  std::int64_t errors;
  std::int64_t n_samples;
  std::int64_t chunk_size;
};

/// Monte Carlo misclassification rate of `detector` for X ~ N(theta, sigma)
/// with true label `label` (+1 or -1).
McEstimate mc_error(const AffineDetector<double>& detector, const Vector<double>& theta,
                    const Matrix<double>& sigma, int label, std::int64_t n_samples,
                    std::uint64_t seed, const McOptions& opts = {});

}  // namespace convextest

#endif  // CONVEXTEST_MONTE_CARLO_H
