#include "convextest/discrete.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "convextest/errors.h"

namespace convextest::discrete {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_cap(double v) { return std::clamp(v, -kDetectorCap, kDetectorCap); }

void check_detector(const DiscreteScheme& scheme, const TabulatedDetector& h) {
  if (h.values.size() != scheme.outcomes())
    throw DimensionMismatch("detector has " + std::to_string(h.values.size()) +
                            " values, scheme has " + std::to_string(scheme.outcomes()) +
                            " outcomes");
}

void check_param(const DiscreteScheme& scheme, int param) {
  if (param < 0 || param >= scheme.size())
    throw InvalidArgument("param", "index " + std::to_string(param) + " out of range");
}

// log sum_x p(x) exp(e(x)) over the support of p.
double weighted_log_sum_exp(const Eigen::Ref<const VectorXd>& p, const VectorXd& e) {
  double top = -kInf;
  for (Eigen::Index x = 0; x < p.size(); ++x)
    if (p(x) > 0.0) top = std::max(top, std::log(p(x)) + e(x));
  if (top == -kInf) return -kInf;
  double sum = 0.0;
  for (Eigen::Index x = 0; x < p.size(); ++x)
    if (p(x) > 0.0) sum += std::exp(std::log(p(x)) + e(x) - top);
  return top + std::log(sum);
}

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

// E_theta[phi(u(X))] for a H0 point and E_theta[phi(-u(X))] for a H1 point.
double moment_phi(const DiscreteScheme& scheme, Loss loss, const VectorXd& u, int param) {
  const double sign = -static_cast<double>(scheme.label(param));
  const auto p = scheme.pmfs().col(param);
  if (loss == Loss::exp) return std::exp(weighted_log_sum_exp(p, (sign * u).eval()));
  double sum = 0.0;
  for (Eigen::Index x = 0; x < p.size(); ++x)
    if (p(x) > 0.0) sum += p(x) * loss_value(loss, sign * u(x));
  return sum;
}

double log_moment_exp(const DiscreteScheme& scheme, const VectorXd& h, int param) {
  const double sign = -static_cast<double>(scheme.label(param));
  return weighted_log_sum_exp(scheme.pmfs().col(param), (sign * h).eval());
}

// Dense tableau simplex for max c^T x s.t. A x <= b, x >= 0 with b >= 0, so
// the origin is feasible. Bland's rule keeps degenerate pivots from cycling.
// `dual` receives the optimal multipliers of the rows.
double simplex_max(const MatrixXd& a, const VectorXd& b, const VectorXd& c, VectorXd& dual) {
  const Eigen::Index m = a.rows(), n = a.cols();
  MatrixXd t = MatrixXd::Zero(m + 1, n + m + 1);
  t.topLeftCorner(m, n) = a;
  t.block(0, n, m, m).setIdentity();
  t.col(n + m).head(m) = b;
  t.row(m).head(n) = -c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
  constexpr double eps = 1e-12;
  for (int pivots = 0; pivots < 10000; ++pivots) {
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n + m && col < 0; ++j)
      if (t(m, j) < -eps) col = j;
    if (col < 0) {
      dual = t.row(m).segment(n, m).transpose();
      return t(m, n + m);
    }
    Eigen::Index row = -1;
    double best = kInf;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, col) <= eps) continue;
      const double ratio = t(i, n + m) / t(i, col);
      if (ratio < best - eps ||
          (ratio <= best + eps && row >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(row)])) {
        best = std::min(best, ratio);
        row = i;
      }
    }
    if (row < 0) throw NonConvergence("simplex: unbounded program", kInf);
    t.row(row) /= t(row, col);
    for (Eigen::Index i = 0; i <= m; ++i)
      if (i != row && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(row);
    basis[static_cast<std::size_t>(row)] = col;
  }
  throw NonConvergence("simplex: pivot limit", kInf);
}

// min over h of sup over H0 x H1 of either
//   log G_exp(h, t) + log G_exp(h, s)       (product_log)
//   G_phi(h, t) + G_phi(h, s)               (additive)
//
// Both objectives split as (worst H0 moment) + (worst H1 moment). Their dual
// is a concave maximization over mixtures a = P0 alpha, b = P1 beta of the
// grid pmfs, D(a, b) = sum_x psi(a_x, b_x) with
//   psi(a, b) = min_u a phi(u) + b phi(-u),
// and any dual point is a certified lower bound. The dual is climbed by
// Frank-Wolfe with away steps, and its pointwise minimizer u*(a, b) is a
// primal candidate next to the Polyak subgradient iterates.
class Minimax {
 public:
  enum class Mode { product_log, additive };

  struct Eval {
    double value;
    int i0, i1;
    double m0, m1;  // worst moments (log moments in product_log mode)
  };

  struct Result {
    VectorXd h;
    Eval eval;
    double lower_bound;
    int iterations;
    bool converged;
  };

  Minimax(const DiscreteScheme& scheme, Loss loss, Mode mode)
      : scheme_(scheme), loss_(mode == Mode::product_log ? Loss::exp : loss), mode_(mode) {
    const auto& i0 = scheme.hypothesis0();
    const auto& i1 = scheme.hypothesis1();
    p0_.resize(scheme.outcomes(), static_cast<Eigen::Index>(i0.size()));
    p1_.resize(scheme.outcomes(), static_cast<Eigen::Index>(i1.size()));
    for (std::size_t j = 0; j < i0.size(); ++j) p0_.col(static_cast<Eigen::Index>(j)) = scheme.pmfs().col(i0[j]);
    for (std::size_t j = 0; j < i1.size(); ++j) p1_.col(static_cast<Eigen::Index>(j)) = scheme.pmfs().col(i1[j]);
  }

  Eval evaluate(const VectorXd& h) const {
    Eval e{0.0, -1, -1, -kInf, -kInf};
    for (int i : scheme_.hypothesis0()) {
      const double m = moment(h, i);
      if (m > e.m0) e.m0 = m, e.i0 = i;
    }
    for (int i : scheme_.hypothesis1()) {
      const double m = moment(h, i);
      if (m > e.m1) e.m1 = m, e.i1 = i;
    }
    e.value = e.m0 + e.m1;
    return e;
  }

  Result run(const SubgradientOptions& opts) const {
    const auto k = scheme_.outcomes();
    VectorXd alpha = VectorXd::Constant(p0_.cols(), 1.0 / static_cast<double>(p0_.cols()));
    VectorXd beta = VectorXd::Constant(p1_.cols(), 1.0 / static_cast<double>(p1_.cols()));

    VectorXd h = VectorXd::Zero(k);
    Eval current = evaluate(h);
    Result best{h, current, -kInf, 0, false};
    auto consider = [&](const VectorXd& cand) {
      const Eval e = evaluate(cand);
      if (e.value < best.eval.value) {
        best.h = cand;
        best.eval = e;
      }
    };

    int it = 0;
    for (;; ++it) {
      const VectorXd a = p0_ * alpha;
      const VectorXd b = p1_ * beta;
      best.lower_bound = std::max(best.lower_bound, dual_value(a, b));
      consider(balanced(recover(a, b)));
      if (best.eval.value - best.lower_bound <= opts.tol) {
        best.converged = true;
        break;
      }
      if (it >= opts.max_iters) break;

      frank_wolfe_step(alpha, beta, /*first_block=*/true);
      frank_wolfe_step(alpha, beta, /*first_block=*/false);

      const VectorXd g = subgradient(h, current.i0, current.i1);
      const double gg = g.squaredNorm();
      if (gg > 0.0) {
        const double level =
            std::isfinite(best.lower_bound) ? best.lower_bound : best.eval.value - 1.0;
        const double step = std::max(0.0, current.value - level) / gg;
        h = (h - step * g).unaryExpr(&clamp_cap);
        current = evaluate(h);
        if (current.value < best.eval.value) {
          best.h = h;
          best.eval = current;
        }
      }
    }
    best.iterations = it;
    best.h = balanced(best.h);
    best.eval = evaluate(best.h);
    return best;
  }

 private:
  double moment(const VectorXd& h, int param) const {
    if (mode_ == Mode::product_log) return log_moment_exp(scheme_, h, param);
    return moment_phi(scheme_, loss_, h, param);
  }

  VectorXd subgradient(const VectorXd& h, int i0, int i1) const {
    const auto p = scheme_.pmfs().col(i0);
    const auto q = scheme_.pmfs().col(i1);
    VectorXd g(h.size());
    if (mode_ == Mode::product_log) {
      const double l0 = log_moment_exp(scheme_, h, i0);
      const double l1 = log_moment_exp(scheme_, h, i1);
      for (Eigen::Index x = 0; x < h.size(); ++x) {
        const double w0 = p(x) > 0.0 ? std::exp(std::log(p(x)) + h(x) - l0) : 0.0;
        const double w1 = q(x) > 0.0 ? std::exp(std::log(q(x)) - h(x) - l1) : 0.0;
        g(x) = w0 - w1;
      }
    } else {
      for (Eigen::Index x = 0; x < h.size(); ++x)
        g(x) = p(x) * loss_derivative(loss_, h(x)) - q(x) * loss_derivative(loss_, -h(x));
    }
    return g;
  }

  double psi(double a, double b) const {
    switch (loss_) {
      case Loss::exp: return 2.0 * std::sqrt(a * b);
      case Loss::hinge: return 2.0 * std::min(a, b);
      case Loss::logistic: return xlogx(a + b) - xlogx(a) - xlogx(b);
    }
    return 0.0;
  }

  double recover(double a, double b) const {
    if (loss_ == Loss::hinge) return b > a ? 1.0 : (a > b ? -1.0 : 0.0);
    if (a <= 0.0 && b <= 0.0) return 0.0;
    if (a <= 0.0) return kDetectorCap;
    if (b <= 0.0) return -kDetectorCap;
    const double ratio = std::log(b / a);
    return clamp_cap(loss_ == Loss::exp ? 0.5 * ratio : ratio);
  }

  VectorXd recover(const VectorXd& a, const VectorXd& b) const {
    VectorXd u(a.size());
    for (Eigen::Index x = 0; x < a.size(); ++x) u(x) = recover(a(x), b(x));
    return u;
  }

  double dual_value(const VectorXd& a, const VectorXd& b) const {
    double d = 0.0;
    for (Eigen::Index x = 0; x < a.size(); ++x) d += psi(a(x), b(x));
    if (mode_ == Mode::product_log) return 2.0 * std::log(d / 2.0);
    return d;
  }

  // Shifting h by a constant moves the two worst exp-moments in opposite
  // directions; equalizing them is optimal for the additive objective and
  // leaves the product objective unchanged.
  VectorXd balanced(const VectorXd& h) const {
    if (loss_ != Loss::exp) return h;
    const Eval e = evaluate(h);
    double shift = 0.0;
    if (mode_ == Mode::product_log) shift = 0.5 * (e.m1 - e.m0);
    else if (e.m0 > 0.0 && e.m1 > 0.0) shift = 0.5 * (std::log(e.m1) - std::log(e.m0));
    if (!std::isfinite(shift)) return h;
    return (h.array() + shift).matrix().unaryExpr(&clamp_cap);
  }

  // One away-step Frank-Wolfe step on the H0 (first_block) or H1 weights.
  void frank_wolfe_step(VectorXd& alpha, VectorXd& beta, bool first_block) const {
    VectorXd& w = first_block ? alpha : beta;
    const MatrixXd& cols = first_block ? p0_ : p1_;
    if (w.size() == 1) return;
    const VectorXd a = p0_ * alpha;
    const VectorXd b = p1_ * beta;
    const VectorXd u = recover(a, b);
    const double sign = first_block ? 1.0 : -1.0;
    VectorXd phi_u(u.size());
    for (Eigen::Index x = 0; x < u.size(); ++x) phi_u(x) = loss_value(loss_, sign * u(x));
    const VectorXd grad = cols.transpose() * phi_u;

    Eigen::Index fw = 0;
    grad.maxCoeff(&fw);
    Eigen::Index away = -1;
    for (Eigen::Index j = 0; j < w.size(); ++j)
      if (w(j) > 0.0 && (away < 0 || grad(j) < grad(away))) away = j;
    const double at_w = grad.dot(w);
    const double fw_gap = grad(fw) - at_w;
    const double away_gap = at_w - grad(away);
    if (std::max(fw_gap, away_gap) <= 0.0) return;

    VectorXd dir;
    double max_step;
    bool away_step = false;
    if (fw_gap >= away_gap || w(away) >= 1.0) {
      dir = -w;
      dir(fw) += 1.0;
      max_step = 1.0;
    } else {
      dir = w;
      dir(away) -= 1.0;
      max_step = w(away) / (1.0 - w(away));
      away_step = true;
    }
    const VectorXd dmix = cols * dir;

    // D is concave along the segment: bisect on the sign of its derivative.
    auto slope = [&](double t) {
      const VectorXd at = first_block ? (a + t * dmix).eval() : a;
      const VectorXd bt = first_block ? b : (b + t * dmix).eval();
      double s = 0.0;
      for (Eigen::Index x = 0; x < at.size(); ++x)
        s += loss_value(loss_, sign * recover(at(x), bt(x))) * dmix(x);
      return s;
    };
    double step;
    if (slope(max_step) >= 0.0) {
      step = max_step;
    } else {
      double lo = 0.0, hi = max_step;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
      }
      step = 0.5 * (lo + hi);
    }
    w += step * dir;
    if (away_step && step == max_step) w(away) = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j)
      if (w(j) < 1e-15) w(j) = 0.0;
    w /= w.sum();
  }

  const DiscreteScheme& scheme_;
  Loss loss_;
  Mode mode_;
  MatrixXd p0_, p1_;
};

}  // namespace

DiscreteScheme::DiscreteScheme(MatrixXd pmfs, std::vector<int> labels)
    : pmfs_(std::move(pmfs)), labels_(std::move(labels)) {
  if (pmfs_.rows() < 1) throw InvalidArgument("outcomes", "need at least one outcome");
  if (pmfs_.cols() != static_cast<Eigen::Index>(labels_.size()))
    throw InvalidArgument("labels", "one label per parameter point required");
  for (Eigen::Index j = 0; j < pmfs_.cols(); ++j) {
    const std::string field = "params[" + std::to_string(j) + "]";
    if (!pmfs_.col(j).allFinite() || pmfs_.col(j).minCoeff() < 0.0)
      throw InvalidArgument(field + ".pmf", "entries must be finite and nonnegative");
    if (std::abs(pmfs_.col(j).sum() - 1.0) > 1e-12)
      throw InvalidArgument(field + ".pmf", "must sum to 1");
    const int s = labels_[static_cast<std::size_t>(j)];
    if (s != -1 && s != 1) throw InvalidArgument(field + ".label", "must be -1 or 1");
    (s == -1 ? h0_ : h1_).push_back(static_cast<int>(j));
  }
  if (h0_.empty() || h1_.empty())
    throw InvalidArgument("labels", "both labels -1 and 1 must be present");
}

DiscreteScheme DiscreteScheme::flipped() const {
  std::vector<int> neg(labels_.size());
  std::transform(labels_.begin(), labels_.end(), neg.begin(), [](int s) { return -s; });
  return DiscreteScheme(pmfs_, std::move(neg));
}

Eigen::VectorXi TabulatedDetector::decisions() const {
  Eigen::VectorXi t(values.size());
  for (Eigen::Index x = 0; x < values.size(); ++x) t(x) = values(x) >= 0.0 ? 1 : -1;
  return t;
}

const char* to_string(Loss loss) {
  switch (loss) {
    case Loss::hinge: return "hinge";
    case Loss::exp: return "exp";
    case Loss::logistic: return "logistic";
  }
  return "unknown";
}

Loss parse_loss(const std::string& name) {
  if (name == "hinge") return Loss::hinge;
  if (name == "exp") return Loss::exp;
  if (name == "logistic") return Loss::logistic;
  throw InvalidArgument("loss", "unknown loss '" + name + "'");
}

double loss_value(Loss loss, double u) {
  switch (loss) {
    case Loss::hinge: return std::max(0.0, 1.0 + u);
    case Loss::exp: return std::exp(u);
    case Loss::logistic: return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
  }
  return 0.0;
}

double loss_derivative(Loss loss, double u) {
  switch (loss) {
    case Loss::hinge: return u >= -1.0 ? 1.0 : 0.0;
    case Loss::exp: return std::exp(u);
    case Loss::logistic: return 1.0 / (1.0 + std::exp(-u));
  }
  return 0.0;
}

double phi_risk(const DiscreteScheme& scheme, const TabulatedDetector& h, int param, Loss loss) {
  check_detector(scheme, h);
  check_param(scheme, param);
  const double s = scheme.label(param);
  const auto p = scheme.pmfs().col(param);
  double sum = 0.0;
  for (Eigen::Index x = 0; x < p.size(); ++x) sum += p(x) * loss_value(loss, -h.values(x) * s);
  return sum;
}

double log_g_exp(const DiscreteScheme& scheme, const TabulatedDetector& h, int param) {
  check_detector(scheme, h);
  check_param(scheme, param);
  return log_moment_exp(scheme, h.values, param);
}

PairObjective pair_objective(const DiscreteScheme& scheme, const TabulatedDetector& h, int i0,
                             int i1) {
  check_detector(scheme, h);
  check_param(scheme, i0);
  check_param(scheme, i1);
  if (scheme.label(i0) != -1) throw InvalidArgument("i0", "must index a H0 grid point");
  if (scheme.label(i1) != 1) throw InvalidArgument("i1", "must index a H1 grid point");
  const double l0 = log_moment_exp(scheme, h.values, i0);
  const double l1 = log_moment_exp(scheme, h.values, i1);
  const auto p = scheme.pmfs().col(i0);
  const auto q = scheme.pmfs().col(i1);
  VectorXd g(h.values.size());
  for (Eigen::Index x = 0; x < g.size(); ++x) {
    const double w0 = p(x) > 0.0 ? std::exp(std::log(p(x)) + h.values(x) - l0) : 0.0;
    const double w1 = q(x) > 0.0 ? std::exp(std::log(q(x)) - h.values(x) - l1) : 0.0;
    g(x) = w0 - w1;
  }
  return {l0 + l1, g};
}

double product_objective(const DiscreteScheme& scheme, const TabulatedDetector& h) {
  check_detector(scheme, h);
  double a = -kInf, b = -kInf;
  for (int i : scheme.hypothesis0()) a = std::max(a, log_moment_exp(scheme, h.values, i));
  for (int i : scheme.hypothesis1()) b = std::max(b, log_moment_exp(scheme, h.values, i));
  return a + b;
}

double direct_objective(const DiscreteScheme& scheme, const TabulatedDetector& h) {
  check_detector(scheme, h);
  double top = -kInf;
  for (int i = 0; i < scheme.size(); ++i) top = std::max(top, log_moment_exp(scheme, h.values, i));
  return top;
}

PairDetector optimal_detector_for_pair(const VectorXd& p0, const VectorXd& p1, bool strict) {
  if (p0.size() != p1.size()) throw DimensionMismatch("pmfs have different lengths");
  PairDetector out;
  out.detector.values.resize(p0.size());
  for (Eigen::Index x = 0; x < p0.size(); ++x) {
    const bool m0 = p0(x) > 0.0;
    const bool m1 = p1(x) > 0.0;
    if (m0 != m1) {
      if (strict)
        throw ZeroMassOutcome("outcome " + std::to_string(x) + " has mass under one pmf only",
                              static_cast<int>(x));
      out.detector.values(x) = m1 ? kDetectorCap : -kDetectorCap;
      out.capped.push_back(static_cast<int>(x));
    } else if (!m0) {
      out.detector.values(x) = 0.0;
    } else {
      out.detector.values(x) = clamp_cap(0.5 * std::log(p1(x) / p0(x)));
      if (std::abs(0.5 * std::log(p1(x) / p0(x))) > kDetectorCap)
        out.capped.push_back(static_cast<int>(x));
    }
  }
  out.value = 2.0 * std::log(hellinger_affinity(p0, p1));
  return out;
}

ProductSaddle saddle_solve_product(const DiscreteScheme& scheme, const SubgradientOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("tol", "must be positive");
  const Minimax solver(scheme, Loss::exp, Minimax::Mode::product_log);
  const auto r = solver.run(opts);
  if (!r.converged)
    throw NonConvergence("product saddle solver hit max_iters", r.eval.value - r.lower_bound);
  return {TabulatedDetector{r.h}, r.eval.value, r.lower_bound, r.eval.i0, r.eval.i1, r.iterations,
          true};
}

namespace {

// Damped Newton on mu log sum_i exp(f_i(h) / mu), f_i the log-moments, with
// mu shrinking towards zero. The smoothed function overestimates the max by
// at most mu log M, so the tail of the continuation settles on the kink that
// subgradient steps only approach slowly.
VectorXd polish_direct(const DiscreteScheme& scheme, VectorXd h) {
  const auto k = h.size();
  const int m = scheme.size();
  VectorXd f(m);
  MatrixXd g(k, m);
  auto smoothed = [&](const VectorXd& x, double mu) {
    for (int i = 0; i < m; ++i) f(i) = log_moment_exp(scheme, x, i);
    const double top = f.maxCoeff();
    return top + mu * std::log((((f.array() - top) / mu).exp()).sum());
  };
  for (double mu = 1e-1; mu >= 1e-11; mu *= 0.1) {
    for (int step = 0; step < 50; ++step) {
      const double value = smoothed(h, mu);
      const double top = f.maxCoeff();
      const VectorXd w = ((f.array() - top) / mu).exp().matrix() / ((f.array() - top) / mu).exp().sum();
      MatrixXd hess = MatrixXd::Zero(k, k);
      for (int i = 0; i < m; ++i) {
        const double sgn = -static_cast<double>(scheme.label(i));
        const auto p = scheme.pmfs().col(i);
        VectorXd pi(k);
        for (Eigen::Index x = 0; x < k; ++x)
          pi(x) = p(x) > 0.0 ? std::exp(std::log(p(x)) + sgn * h(x) - f(i)) : 0.0;
        g.col(i) = sgn * pi;
        if (w(i) > 0.0) {
          hess.diagonal() += w(i) * pi;
          hess.noalias() -= w(i) * pi * pi.transpose();
        }
      }
      const VectorXd grad = g * w;
      hess.noalias() += (g * w.asDiagonal() * g.transpose() - grad * grad.transpose()) / mu;
      hess.diagonal().array() += 1e-12 * std::max(1.0, hess.diagonal().maxCoeff());
      const VectorXd dir = -hess.ldlt().solve(grad);
      if (!dir.allFinite()) break;
      const double slope = grad.dot(dir);
      if (!(slope < 0.0)) break;
      double t = 1.0;
      VectorXd next;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        next = (h + t * dir).unaryExpr(&clamp_cap);
        if (smoothed(next, mu) <= value + 1e-4 * t * slope) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      const double change = (next - h).cwiseAbs().maxCoeff();
      h = std::move(next);
      if (change < 1e-13) break;
    }
  }
  return h;
}

}  // namespace

DirectResult direct_solve(const DiscreteScheme& scheme, const DirectOptions& opts) {
  if (opts.restarts < 0) throw InvalidArgument("restarts", "must be nonnegative");
  if (!(opts.tol > 0.0)) throw InvalidArgument("tol", "must be positive");
  const auto k = scheme.outcomes();

  std::vector<VectorXd> starts;
  for (const auto& w : opts.warm_starts) {
    check_detector(scheme, w);
    starts.push_back(w.values);
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    VectorXd h(k);
    for (Eigen::Index x = 0; x < k; ++x) h(x) = unif(rng);
    starts.push_back(std::move(h));
  }
  if (starts.empty()) starts.push_back(VectorXd::Zero(k));

  auto evaluate = [&](const VectorXd& h, int* worst) {
    double top = -kInf;
    for (int i = 0; i < scheme.size(); ++i) {
      const double v = log_moment_exp(scheme, h, i);
      if (v > top) top = v, *worst = i;
    }
    return top;
  };

  DirectResult best{TabulatedDetector{starts.front()}, kInf, 0};
  for (std::size_t s = 0; s < starts.size(); ++s) {
    VectorXd h = starts[s];
    int worst = 0;
    double f = evaluate(h, &worst);
    VectorXd h_best = h;
    double f_best = f;
    // Target-level Polyak steps: aim at f_best - delta, and halve delta
    // (restarting from the best point) after a run of steps that never
    // reaches the target.
    double delta = 0.5;
    int misses = 0;
    constexpr int kPatience = 100;
    for (int it = 0; it < opts.max_iters && delta > opts.tol; ++it) {
      const double sgn = -static_cast<double>(scheme.label(worst));
      const auto p = scheme.pmfs().col(worst);
      VectorXd g(k);
      for (Eigen::Index x = 0; x < k; ++x)
        g(x) = p(x) > 0.0 ? sgn * std::exp(std::log(p(x)) + sgn * h(x) - f) : 0.0;
      const double gg = g.squaredNorm();
      if (gg <= 0.0) break;
      const double level = f_best - delta;
      h = (h - ((f - level) / gg) * g).unaryExpr(&clamp_cap);
      f = evaluate(h, &worst);
      misses = f <= level ? 0 : misses + 1;
      if (f < f_best) {
        f_best = f;
        h_best = h;
      }
      if (misses > kPatience) {
        delta *= 0.5;
        misses = 0;
        h = h_best;
        f = evaluate(h, &worst);
      }
    }
    const VectorXd polished = polish_direct(scheme, h_best);
    const double f_polished = evaluate(polished, &worst);
    if (f_polished < f_best) f_best = f_polished, h_best = polished;
    if (f_best < best.value) best = {TabulatedDetector{h_best}, f_best, static_cast<int>(s)};
  }
  return best;
}

SupremaSandwich sandwich_product_check(const DiscreteScheme& scheme, const TabulatedDetector& h) {
  check_detector(scheme, h);
  double a = -kInf, b = -kInf;
  for (int i : scheme.hypothesis0()) a = std::max(a, log_moment_exp(scheme, h.values, i));
  for (int i : scheme.hypothesis1()) b = std::max(b, log_moment_exp(scheme, h.values, i));
  SupremaSandwich r;
  r.sup0 = a;
  r.sup1 = b;
  r.sup_single = std::max(a, b);
  r.sup_product_sum = a + b;
  const double slack = 1e-12 * std::max(1.0, std::abs(r.sup_single));
  r.right_holds = r.sup_product_sum <= 2.0 * r.sup_single + slack;
  if (std::min(a, b) >= -1e-12) r.left_holds = r.sup_single <= r.sup_product_sum + slack;
  return r;
}

double hellinger_affinity(const VectorXd& p, const VectorXd& q) {
  if (p.size() != q.size()) throw DimensionMismatch("pmfs have different lengths");
  return (p.array() * q.array()).sqrt().sum();
}

ClosestPair hellinger_closest_pair(const DiscreteScheme& scheme) {
  ClosestPair best{-1, -1, -1.0};
  for (int i0 : scheme.hypothesis0())
    for (int i1 : scheme.hypothesis1()) {
      const double a = hellinger_affinity(scheme.pmf(i0), scheme.pmf(i1));
      if (a > best.affinity) best = {i0, i1, a};
    }
  return best;
}

double worst_case_error(const DiscreteScheme& scheme, const Eigen::VectorXi& decisions) {
  if (decisions.size() != scheme.outcomes())
    throw DimensionMismatch("decision vector length does not match the outcomes");
  double worst = 0.0;
  for (int i = 0; i < scheme.size(); ++i) {
    const auto p = scheme.pmfs().col(i);
    double err = 0.0;
    for (Eigen::Index x = 0; x < p.size(); ++x)
      if (decisions(x) != scheme.label(i)) err += p(x);
    worst = std::max(worst, err);
  }
  return worst;
}

double worst_case_error(const DiscreteScheme& scheme, const TabulatedDetector& h) {
  check_detector(scheme, h);
  return worst_case_error(scheme, h.decisions());
}

namespace {

// The hinge objective is piecewise linear, which subgradient steps cannot
// certify to a tight gap, but it is an LP. Clipping h to [-1, 1] never
// increases it, and there it equals
//   2 + max_{H0} p . h - min_{H1} q . h,
// minimized as an LP in g = h + 1 in [0, 2] and the two maxima s, t >= 0:
//   min s + t  s.t.  s >= p . g,  t >= 2 - q . g,  g <= 2.
// Its dual has a feasible origin, and the primal is read off the duals.
SurrogateRow hinge_surrogate(const DiscreteScheme& scheme, double tol) {
  const auto& h0 = scheme.hypothesis0();
  const auto& h1 = scheme.hypothesis1();
  const auto k = static_cast<Eigen::Index>(scheme.outcomes());
  const auto n0 = static_cast<Eigen::Index>(h0.size());
  const auto n1 = static_cast<Eigen::Index>(h1.size());
  // Dual variables: alpha (n0), beta (n1), nu (k). Rows: s, t, then one per outcome.
  MatrixXd a = MatrixXd::Zero(2 + k, n0 + n1 + k);
  VectorXd b = VectorXd::Zero(2 + k);
  VectorXd c = VectorXd::Zero(n0 + n1 + k);
  a.row(0).head(n0).setOnes();
  a.row(1).segment(n0, n1).setOnes();
  b(0) = b(1) = 1.0;
  for (Eigen::Index j = 0; j < n0; ++j) a.col(j).tail(k) = -scheme.pmfs().col(h0[static_cast<std::size_t>(j)]);
  for (Eigen::Index j = 0; j < n1; ++j) a.col(n0 + j).tail(k) = scheme.pmfs().col(h1[static_cast<std::size_t>(j)]);
  a.bottomRightCorner(k, k) = -MatrixXd::Identity(k, k);
  c.segment(n0, n1).setConstant(2.0);
  c.tail(k).setConstant(-2.0);
  VectorXd dual;
  const double lp_value = simplex_max(a, b, c, dual);

  TabulatedDetector det{(dual.tail(k).array() - 1.0).cwiseMax(-1.0).cwiseMin(1.0).matrix()};
  double m0 = -kInf, m1 = -kInf;
  for (int i : h0) m0 = std::max(m0, moment_phi(scheme, Loss::hinge, det.values, i));
  for (int i : h1) m1 = std::max(m1, moment_phi(scheme, Loss::hinge, det.values, i));
  const double value = m0 + m1;
  const double gap = std::max(0.0, value - lp_value);
  return {Loss::hinge, value, worst_case_error(scheme, det), gap <= tol, gap, det};
}

}  // namespace

std::vector<SurrogateRow> compare_surrogates(const DiscreteScheme& scheme,
                                             const std::vector<Loss>& losses,
                                             const SubgradientOptions& opts) {
  std::vector<SurrogateRow> rows;
  for (Loss loss : losses) {
    if (loss == Loss::hinge) {
      rows.push_back(hinge_surrogate(scheme, opts.tol));
      continue;
    }
    const Minimax solver(scheme, loss, Minimax::Mode::additive);
    const auto r = solver.run(opts);
    TabulatedDetector det{r.h};
    rows.push_back({loss, r.eval.value, worst_case_error(scheme, det), r.converged,
                    r.eval.value - r.lower_bound, det});
  }
  return rows;
}

std::string surrogate_table_csv(const std::vector<SurrogateRow>& rows) {
  std::ostringstream out;
  out << "loss,value,worst_case_error,converged\n";
  char buf[64];
  for (const auto& r : rows) {
    out << to_string(r.loss) << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.worst_case_error);
    out << buf << ',' << (r.converged ? "true" : "false") << '\n';
  }
  return out.str();
}

double equivalence_residual(const VectorXd& a, const VectorXd& b) {
  if (a.size() != b.size()) throw DimensionMismatch("detectors have different lengths");
  if (a.size() == 0) return 0.0;
  const VectorXd d = a - b;
  return 0.5 * (d.maxCoeff() - d.minCoeff());
}

}  // namespace convextest::discrete
