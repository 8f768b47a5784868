#ifndef CONVEXTEST_DISCRETE_H
#define CONVEXTEST_DISCRETE_H

// Finite observation schemes: K outcomes and a grid of M parameter points,
// each with its own pmf and a hypothesis label s = -1 (H0) or +1 (H1).
//
// Everything here is exact enumeration over the grid plus first-order
// solvers for the convex detector problems. A detector is a table h(x) over
// the outcomes; its test answers +1 when h(x) >= 0.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace convextest::discrete {

class DiscreteScheme {
 public:
  /// `pmfs` holds one pmf per column (outcomes x params); labels are +-1.
  DiscreteScheme(Eigen::MatrixXd pmfs, std::vector<int> labels);

  int outcomes() const { return static_cast<int>(pmfs_.rows()); }
  int size() const { return static_cast<int>(pmfs_.cols()); }
  const Eigen::MatrixXd& pmfs() const { return pmfs_; }
  Eigen::VectorXd pmf(int param) const { return pmfs_.col(param); }
  int label(int param) const { return labels_.at(static_cast<std::size_t>(param)); }
  const std::vector<int>& labels() const { return labels_; }
  /// Grid indices labelled -1 and +1, in increasing order.
  const std::vector<int>& hypothesis0() const { return h0_; }
  const std::vector<int>& hypothesis1() const { return h1_; }

  /// Same pmfs with every label negated.
  DiscreteScheme flipped() const;

 private:
  Eigen::MatrixXd pmfs_;
  std::vector<int> labels_;
  std::vector<int> h0_, h1_;
};

struct TabulatedDetector {
  Eigen::VectorXd values;

  int decide(int outcome) const { return values(outcome) >= 0.0 ? 1 : -1; }
  Eigen::VectorXi decisions() const;
};

enum class Loss { hinge, exp, logistic };

const char* to_string(Loss loss);
/// Throws InvalidArgument for names other than hinge / exp / logistic.
Loss parse_loss(const std::string& name);
/// phi(u): (1 + u)_+, e^u or log(1 + e^u).
double loss_value(Loss loss, double u);
/// A subgradient of phi at u (right derivative for the hinge kink).
double loss_derivative(Loss loss, double u);

/// E_theta[phi(-h(X) s(theta))] by exact summation.
double phi_risk(const DiscreteScheme& scheme, const TabulatedDetector& h, int param, Loss loss);

/// log E_theta[exp(-h(X) s(theta))], log-sum-exp stabilized.
double log_g_exp(const DiscreteScheme& scheme, const TabulatedDetector& h, int param);

struct PairObjective {
  double value;
  Eigen::VectorXd gradient;
};

/// log G_exp(h, theta_i0) + log G_exp(h, theta_i1) and its gradient in h.
/// Requires label(i0) == -1 and label(i1) == +1.
PairObjective pair_objective(const DiscreteScheme& scheme, const TabulatedDetector& h, int i0,
                             int i1);

/// sup over H0 x H1 grid pairs of the pair objective.
double product_objective(const DiscreteScheme& scheme, const TabulatedDetector& h);
/// sup over the whole grid of log G_exp.
double direct_objective(const DiscreteScheme& scheme, const TabulatedDetector& h);

/// Largest |h| a log-ratio detector may take at outcomes with one-sided mass.
inline constexpr double kDetectorCap = 30.0;

struct PairDetector {
  TabulatedDetector detector;  // 1/2 log(p1 / p0), capped at +-kDetectorCap
  double value;                // 2 log(Hellinger affinity)
  std::vector<int> capped;     // outcomes whose value was capped
};

/// Minimizer of the pair objective for two pmfs. Outcomes with mass under
/// only one pmf get +-kDetectorCap and are listed in `capped`; with `strict`
/// they throw ZeroMassOutcome instead.
PairDetector optimal_detector_for_pair(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1,
                                       bool strict = false);

struct SubgradientOptions {
  int max_iters = 50000;
  double tol = 1e-7;
};

struct ProductSaddle {
  TabulatedDetector detector;  // balanced: the two worst log-moments are equal
  double value;                // product objective at `detector`
  double lower_bound;          // certified lower bound on the optimal value
  int i0, i1;                  // grid pair attaining the sup at `detector`
  int iterations;
  bool converged;
};

/// Minimizes the product objective over all tabulated detectors. Polyak
/// subgradient steps with best-iterate tracking run against a lower bound
/// from Frank-Wolfe ascent on the dual over mixtures of grid pmfs; stops when
/// value - lower_bound <= tol. Throws NonConvergence otherwise.
ProductSaddle saddle_solve_product(const DiscreteScheme& scheme,
                                   const SubgradientOptions& opts = {});

struct DirectOptions {
  int restarts = 16;
  double tol = 1e-7;
  int max_iters = 50000;  // per start
  std::uint64_t seed = 0;
  std::vector<TabulatedDetector> warm_starts;
};

struct DirectResult {
  TabulatedDetector detector;
  double value;  // direct objective at `detector`
  int start;     // index of the winning start (warm starts first)
};

/// Best-found minimizer of the direct objective: given h the worst grid
/// point is found by enumeration, then h takes a subgradient step on that
/// point's log-moment with a Polyak step towards an adaptively lowered
/// target level. Warm starts are tried first, then seeded random restarts.
DirectResult direct_solve(const DiscreteScheme& scheme, const DirectOptions& opts = {});

struct SupremaSandwich {
  double sup0;             // max over the H0 grid of log G_exp
  double sup1;             // max over the H1 grid
  double sup_single;       // max(sup0, sup1)
  double sup_product_sum;  // sup0 + sup1
  bool right_holds;        // sup0 + sup1 <= 2 max(sup0, sup1)
  /// max <= sum, evaluated only when min(sup0, sup1) >= -1e-12.
  std::optional<bool> left_holds;
};

SupremaSandwich sandwich_product_check(const DiscreteScheme& scheme, const TabulatedDetector& h);

/// sum_x sqrt(p(x) q(x)).
double hellinger_affinity(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

struct ClosestPair {
  int i0, i1;
  double affinity;
};

/// Exhaustive maximization of the affinity over H0 x H1 grid pairs; ties go
/// to the lexicographically smallest (i0, i1).
ClosestPair hellinger_closest_pair(const DiscreteScheme& scheme);

/// max over grid points of P_theta(T(X) != s(theta)) for decisions T in {-1,+1}^K.
double worst_case_error(const DiscreteScheme& scheme, const Eigen::VectorXi& decisions);
double worst_case_error(const DiscreteScheme& scheme, const TabulatedDetector& h);

struct SurrogateRow {
  Loss loss;
  double value;  // min over h of sup_{H0 x H1} G_phi + G_phi (best found)
  double worst_case_error;
  bool converged;
  double gap;  // value minus the certified lower bound
  TabulatedDetector detector;
};

/// For each loss minimizes sup over H0 x H1 of G_phi(h, t) + G_phi(h, s) and
/// reports the worst-case 0-1 error of sign(h). Non-convergence is reported
/// in the row, not thrown.
std::vector<SurrogateRow> compare_surrogates(const DiscreteScheme& scheme,
                                             const std::vector<Loss>& losses,
                                             const SubgradientOptions& opts = {});

/// CSV with header loss,value,worst_case_error,converged.
std::string surrogate_table_csv(const std::vector<SurrogateRow>& rows);

/// min over constants c of max_x |a(x) - b(x) - c|.
double equivalence_residual(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace convextest::discrete

#endif  // CONVEXTEST_DISCRETE_H
