#ifndef CONVEXTEST_BOUNDS_H
#define CONVEXTEST_BOUNDS_H

// Worst-case error of the affine test in the Gaussian scheme, exact and
// degraded by an inexact closest pair.

namespace convextest {

/// An error bound. `vacuous` marks values that say nothing useful (above 1/2,
/// or the normalized bound at delta >= 1/2); they are still returned as is.
struct Bound {
  double value;
  bool vacuous;
};

/// 1 - Phi(rho / 2): worst-case error of the test built on the exact pair
/// with Mahalanobis gap `rho`.
double epsilon_star(double rho);

/// 1 - Phi(gap/2 - delta_raw/gap) for a pair with gap `gap_tilde` that
/// violates first-order optimality by at most `delta_raw`.
Bound bound_gjn(double gap_tilde, double delta_raw);

/// 1 - Phi(rho/2 - sqrt(delta)/2 - delta/(rho - sqrt(delta))), written in
/// terms of the exact gap. Throws InvalidRegime unless rho > sqrt(delta).
Bound bound_exact_reference(double rho_star, double delta_raw);

/// 1 - Phi((1/2 - delta) rho / (1 + sqrt(delta))) for the normalized
/// violation `delta_norm`. Vacuous when delta_norm >= 1/2.
Bound bound_normalized_reference(double rho_star, double delta_norm);

}  // namespace convextest

#endif  // CONVEXTEST_BOUNDS_H
