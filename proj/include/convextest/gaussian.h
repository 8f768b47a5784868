#ifndef CONVEXTEST_GAUSSIAN_H
#define CONVEXTEST_GAUSSIAN_H

// Testing two convex hypotheses on the mean of a Gaussian observation
// X ~ N(theta, Sigma): closest-pair solver, optimal affine detector,
// first-order optimality certificates and the inequalities that relate an
// inexact pair to the exact one.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "convextest/bounds.h"
#include "convextest/convex_set.h"
#include "convextest/errors.h"

namespace convextest {

template <typename Scalar>
class GaussianScheme {
 public:
  GaussianScheme(Matrix<Scalar> sigma, ConvexSet<Scalar> theta0, ConvexSet<Scalar> theta1)
      : sigma_(std::move(sigma)), theta0_(std::move(theta0)), theta1_(std::move(theta1)) {
    const auto n = sigma_.rows();
    if (n == 0 || sigma_.cols() != n) throw InvalidArgument("sigma", "must be a square matrix");
    if (!sigma_.allFinite()) throw InvalidArgument("sigma", "must be finite");
    const Scalar scale = std::max<Scalar>(Scalar(1), sigma_.cwiseAbs().maxCoeff());
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      throw InvalidArgument("sigma", "not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sigma_, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > Scalar(0)))
      throw InvalidArgument("sigma", "not positive definite");
    if (theta0_.dim() != n)
      throw InvalidArgument("theta0", "dimension " + std::to_string(theta0_.dim()) +
                                          " does not match sigma (" + std::to_string(n) + ")");
    if (theta1_.dim() != n)
      throw InvalidArgument("theta1", "dimension " + std::to_string(theta1_.dim()) +
                                          " does not match sigma (" + std::to_string(n) + ")");
    const Matrix<Scalar> sym = (sigma_ + sigma_.transpose()) / Scalar(2);
    chol_ = sym.llt().matrixL();
    precision_ = sym.llt().solve(Matrix<Scalar>::Identity(n, n));
    precision_ = ((precision_ + precision_.transpose()) / Scalar(2)).eval();
    max_precision_eig_ = Scalar(1) / eig.eigenvalues().minCoeff();
  }

  Eigen::Index dim() const { return sigma_.rows(); }
  const Matrix<Scalar>& sigma() const { return sigma_; }
  /// Sigma^{-1}.
  const Matrix<Scalar>& precision() const { return precision_; }
  /// Lower Cholesky factor of Sigma.
  const Matrix<Scalar>& sigma_cholesky() const { return chol_; }
  Scalar max_precision_eigenvalue() const { return max_precision_eig_; }
  const ConvexSet<Scalar>& theta0() const { return theta0_; }
  const ConvexSet<Scalar>& theta1() const { return theta1_; }

  /// ||Sigma^{-1/2} v||_2.
  Scalar mahalanobis(const VectorRef<Scalar>& v) const {
    return std::sqrt(std::max(Scalar(0), v.dot(precision_ * v)));
  }

 private:
  Matrix<Scalar> sigma_;
  ConvexSet<Scalar> theta0_;
  ConvexSet<Scalar> theta1_;
  Matrix<Scalar> chol_;
  Matrix<Scalar> precision_;
  Scalar max_precision_eig_;
};

/// h(x) = w^T x + c; the test answers +1 (hypothesis 1) when h(x) >= 0.
template <typename Scalar>
struct AffineDetector {
  Vector<Scalar> w;
  Scalar c;

  Scalar operator()(const VectorRef<Scalar>& x) const { return w.dot(x) + c; }
  int decide(const VectorRef<Scalar>& x) const { return (*this)(x) >= Scalar(0) ? 1 : -1; }
};

/// Likelihood-ratio detector of N(theta1, Sigma) against N(theta0, Sigma):
/// w = Sigma^{-1}(theta1 - theta0), c = -w^T (theta0 + theta1) / 2.
template <typename Scalar>
AffineDetector<Scalar> make_detector(const GaussianScheme<Scalar>& scheme,
                                     const VectorRef<Scalar>& theta0,
                                     const VectorRef<Scalar>& theta1) {
  AffineDetector<Scalar> det;
  det.w = scheme.precision() * (theta1 - theta0);
  det.c = -det.w.dot(theta0 + theta1) / Scalar(2);
  return det;
}

template <typename Scalar>
struct OptimalityCertificate {
  Scalar delta_raw;   // sup of the first-order violation over theta0 x theta1
  Scalar delta_norm;  // delta_raw / gap^2
  Scalar gap;         // ||Sigma^{-1/2}(theta0 - theta1)||
};

/// How far (theta0, theta1) is from satisfying the first-order optimality
/// condition of min 1/2 ||Sigma^{-1/2}(t - s)||^2 over theta0 x theta1.
/// Throws DegeneratePair when the gap is <= 1e-12.
template <typename Scalar>
OptimalityCertificate<Scalar> certificate(const GaussianScheme<Scalar>& scheme,
                                          const VectorRef<Scalar>& theta0,
                                          const VectorRef<Scalar>& theta1) {
  if (theta0.size() != scheme.dim() || theta1.size() != scheme.dim())
    throw DimensionMismatch("certificate: pair dimension does not match the scheme");
  const Vector<Scalar> diff = theta0 - theta1;
  const Vector<Scalar> pd = scheme.precision() * diff;
  const Scalar gap2 = std::max(Scalar(0), diff.dot(pd));
  const Scalar gap = std::sqrt(gap2);
  if (!(gap > Scalar(1e-12)))
    throw DegeneratePair("certificate: Mahalanobis gap " + std::to_string(double(gap)) +
                         " is too small to normalize");
  const Vector<Scalar> neg_pd = -pd;
  const Scalar slack0 = support(scheme.theta0(), VectorRef<Scalar>(neg_pd)) - neg_pd.dot(theta0);
  const Scalar slack1 = support(scheme.theta1(), VectorRef<Scalar>(pd)) - pd.dot(theta1);
  const Scalar raw = std::max(Scalar(0), slack0 + slack1);
  return {raw, raw / gap2, gap};
}

template <typename Scalar>
struct SaddleSolution {
  Vector<Scalar> theta0_star;
  Vector<Scalar> theta1_star;
  Scalar rho;
  AffineDetector<Scalar> detector;
  Scalar epsilon_star;
  int iterations;
  OptimalityCertificate<Scalar> certificate;
};

template <typename Scalar>
struct SolverOptions {
  Scalar tol_delta = Scalar(1e-8);
  int max_iters = 100000;
  Scalar overlap_gap = Scalar(1e-8);
  /// Polytope projections run to rounding level: a warm-started projection
  /// that stops at a loose gap stalls the certificate near that gap.
  ProjectionOptions<Scalar> projection{Scalar(1e-10), Scalar(0), 100000};
  /// Called with (iteration, theta0, theta1, objective) before every step.
  std::function<void(int, const Vector<Scalar>&, const Vector<Scalar>&, Scalar)> observer;
};

/// Minimizes 1/2 (t - s)^T Sigma^{-1} (t - s) over theta0 x theta1 by
/// projected gradient on the joint variable with step 1/L, L = 2
/// lambda_max(Sigma^{-1}), stopping once the normalized certificate is below
/// `tol_delta`.
///
/// Throws OverlappingHypotheses once the gap drops below `overlap_gap` (the
/// gap of any feasible pair bounds the optimum from above) and
/// SolverNonConvergence when `max_iters` is reached.
template <typename Scalar>
SaddleSolution<Scalar> solve_closest_pair(const GaussianScheme<Scalar>& scheme,
                                          const SolverOptions<Scalar>& opts = {}) {
  if (!(opts.tol_delta > Scalar(0))) throw InvalidArgument("tol_delta", "must be positive");
  if (opts.max_iters < 1) throw InvalidArgument("max_iters", "must be positive");

  Projector<Scalar> proj0(scheme.theta0(), opts.projection);
  Projector<Scalar> proj1(scheme.theta1(), opts.projection);
  Vector<Scalar> t0 = anchor_point(scheme.theta0());
  Vector<Scalar> t1 = anchor_point(scheme.theta1());
  const Scalar step = Scalar(1) / (Scalar(2) * scheme.max_precision_eigenvalue());

  OptimalityCertificate<Scalar> cert{};
  for (int it = 0;; ++it) {
    const Vector<Scalar> diff = t0 - t1;
    const Scalar gap = scheme.mahalanobis(diff);
    if (opts.observer) opts.observer(it, t0, t1, gap * gap / Scalar(2));
    if (gap < opts.overlap_gap)
      throw OverlappingHypotheses("hypothesis sets intersect or touch (Mahalanobis gap " +
                                      std::to_string(double(gap)) + ")",
                                  double(gap));
    cert = certificate(scheme, VectorRef<Scalar>(t0), VectorRef<Scalar>(t1));
    if (cert.delta_norm <= opts.tol_delta) {
      SaddleSolution<Scalar> sol;
      sol.detector = make_detector(scheme, VectorRef<Scalar>(t0), VectorRef<Scalar>(t1));
      sol.rho = cert.gap;
      sol.epsilon_star = Scalar(epsilon_star(double(cert.gap)));
      sol.iterations = it;
      sol.certificate = cert;
      sol.theta0_star = std::move(t0);
      sol.theta1_star = std::move(t1);
      return sol;
    }
    if (it >= opts.max_iters)
      throw SolverNonConvergence(double(cert.delta_raw), double(cert.delta_norm), double(cert.gap),
                                 it);
    const Vector<Scalar> grad = scheme.precision() * diff;
    Vector<Scalar> next0 = proj0(t0 - step * grad);
    Vector<Scalar> next1 = proj1(t1 + step * grad);
    t0 = std::move(next0);
    t1 = std::move(next1);
  }
}

/// Distances and flags relating an inexact pair to the exact solution.
/// Each `*_violation` is (left side - right side) of its inequality; the flag
/// holds when the violation is at most 1e-10. The normalized upper inequality
/// is only evaluated when sqrt(delta_norm) < 1.
template <typename Scalar>
struct SandwichReport {
  Scalar rho_star;
  Scalar rho_tilde;
  Scalar delta_raw;
  Scalar delta_norm;
  Scalar raw_lower_violation;   // rho* - sqrt(delta_raw) <= rho~
  Scalar raw_upper_violation;   // rho~ <= rho* + sqrt(delta_raw)
  Scalar norm_lower_violation;  // rho* / (1 + sqrt(delta_norm)) <= rho~
  std::optional<Scalar> norm_upper_violation;  // rho~ <= rho* / (1 - sqrt(delta_norm))
  bool raw_lower;
  bool raw_upper;
  bool norm_lower;
  std::optional<bool> norm_upper;

  bool all_hold() const {
    return raw_lower && raw_upper && norm_lower && norm_upper.value_or(true);
  }
  Scalar worst_violation() const {
    Scalar worst = std::max({raw_lower_violation, raw_upper_violation, norm_lower_violation});
    if (norm_upper_violation) worst = std::max(worst, *norm_upper_violation);
    return worst;
  }
};

inline constexpr double kSandwichSlack = 1e-10;

template <typename Scalar>
SandwichReport<Scalar> sandwich_check(const GaussianScheme<Scalar>& scheme,
                                      const SaddleSolution<Scalar>& exact,
                                      const VectorRef<Scalar>& theta0_tilde,
                                      const VectorRef<Scalar>& theta1_tilde) {
  const auto cert = certificate(scheme, theta0_tilde, theta1_tilde);
  SandwichReport<Scalar> rep;
  rep.rho_star = exact.rho;
  rep.rho_tilde = cert.gap;
  rep.delta_raw = cert.delta_raw;
  rep.delta_norm = cert.delta_norm;
  const Scalar root_raw = std::sqrt(cert.delta_raw);
  const Scalar root_norm = std::sqrt(cert.delta_norm);
  rep.raw_lower_violation = (exact.rho - root_raw) - cert.gap;
  rep.raw_upper_violation = cert.gap - (exact.rho + root_raw);
  rep.norm_lower_violation = exact.rho / (Scalar(1) + root_norm) - cert.gap;
  if (root_norm < Scalar(1))
    rep.norm_upper_violation = cert.gap - exact.rho / (Scalar(1) - root_norm);
  const Scalar slack = Scalar(kSandwichSlack);
  rep.raw_lower = rep.raw_lower_violation <= slack;
  rep.raw_upper = rep.raw_upper_violation <= slack;
  rep.norm_lower = rep.norm_lower_violation <= slack;
  if (rep.norm_upper_violation) rep.norm_upper = *rep.norm_upper_violation <= slack;
  return rep;
}

}  // namespace convextest

#endif  // CONVEXTEST_GAUSSIAN_H
