#ifndef CONVEXTEST_NORMAL_H
#define CONVEXTEST_NORMAL_H

namespace convextest {

/// Complementary error function, W. J. Cody's rational Chebyshev
/// approximation (Math. Comp. 1969), double precision.
double erfc_cody(double x);

/// Standard normal cdf Phi(z). Saturates to 0/1 in the tails.
double normal_cdf(double z);

/// Upper tail 1 - Phi(z), evaluated without cancellation for large z.
double normal_sf(double z);

}  // namespace convextest

#endif  // CONVEXTEST_NORMAL_H
