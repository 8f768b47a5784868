#ifndef CONVEXTEST_CONVEX_SET_H
#define CONVEXTEST_CONVEX_SET_H

// Bounded closed convex sets used as hypotheses, with Euclidean projection,
// support function and membership oracles.
//
// Four representations are supported: coordinate box, Euclidean ball,
// ellipsoid {x : (x-c)^T S^{-1} (x-c) <= 1} and V-polytope (convex hull of a
// vertex list). Sets are immutable values and every oracle is a pure free
// function, so they can be shared between threads.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "convextest/errors.h"

namespace convextest {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorRef = Eigen::Ref<const Vector<Scalar>>;

enum class SetKind { box, ball, ellipsoid, polytope };

inline const char* to_string(SetKind kind) {
  switch (kind) {
    case SetKind::box: return "box";
    case SetKind::ball: return "ball";
    case SetKind::ellipsoid: return "ellipsoid";
    case SetKind::polytope: return "polytope";
  }
  return "unknown";
}

template <typename Scalar>
struct Box {
  Vector<Scalar> lower;
  Vector<Scalar> upper;
};

template <typename Scalar>
struct Ball {
  Vector<Scalar> center;
  Scalar radius;
};

/// Ellipsoid with its shape matrix eigendecomposition cached at construction.
template <typename Scalar>
class Ellipsoid {
 public:
  Ellipsoid(Vector<Scalar> center, Matrix<Scalar> shape)
      : center_(std::move(center)), shape_(std::move(shape)) {
    const auto n = center_.size();
    if (n == 0) throw InvalidArgument("center", "empty");
    if (shape_.rows() != n || shape_.cols() != n)
      throw DimensionMismatch("ellipsoid shape must be " + std::to_string(n) + "x" +
                              std::to_string(n));
    const Scalar scale = std::max<Scalar>(Scalar(1), shape_.cwiseAbs().maxCoeff());
    if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      throw InvalidArgument("shape", "not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(shape_);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > Scalar(0)))
      throw InvalidArgument("shape", "not positive definite");
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = eig.eigenvectors();
  }

  const Vector<Scalar>& center() const { return center_; }
  const Matrix<Scalar>& shape() const { return shape_; }
  const Vector<Scalar>& eigenvalues() const { return eigenvalues_; }
  const Matrix<Scalar>& eigenvectors() const { return eigenvectors_; }

 private:
  Vector<Scalar> center_;
  Matrix<Scalar> shape_;
  Vector<Scalar> eigenvalues_;
  Matrix<Scalar> eigenvectors_;
};

/// Convex hull of the columns of `vertices` (dim x count).
template <typename Scalar>
struct Polytope {
  Matrix<Scalar> vertices;
};

template <typename Scalar>
class ConvexSet {
 public:
  using Variant = std::variant<Box<Scalar>, Ball<Scalar>, Ellipsoid<Scalar>, Polytope<Scalar>>;

  static ConvexSet box(Vector<Scalar> lower, Vector<Scalar> upper) {
    if (lower.size() == 0) throw InvalidArgument("lower", "empty");
    if (lower.size() != upper.size())
      throw DimensionMismatch("box bounds have different lengths");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)))
        throw InvalidArgument("lower", "box bounds must be finite");
      if (lower(i) > upper(i))
        throw InvalidArgument("lower", "lower > upper at coordinate " + std::to_string(i));
    }
    return ConvexSet(Box<Scalar>{std::move(lower), std::move(upper)});
  }

  static ConvexSet ball(Vector<Scalar> center, Scalar radius) {
    if (center.size() == 0) throw InvalidArgument("center", "empty");
    if (!(radius >= Scalar(0)) || !std::isfinite(radius))
      throw InvalidArgument("radius", "must be finite and nonnegative");
    return ConvexSet(Ball<Scalar>{std::move(center), radius});
  }

  static ConvexSet ellipsoid(Vector<Scalar> center, Matrix<Scalar> shape) {
    return ConvexSet(Ellipsoid<Scalar>(std::move(center), std::move(shape)));
  }

  /// `vertices` holds one vertex per column.
  static ConvexSet polytope(Matrix<Scalar> vertices) {
    if (vertices.cols() == 0 || vertices.rows() == 0)
      throw InvalidArgument("vertices", "need at least one vertex");
    if (!vertices.allFinite()) throw InvalidArgument("vertices", "must be finite");
    return ConvexSet(Polytope<Scalar>{std::move(vertices)});
  }

  static ConvexSet polytope(const std::vector<Vector<Scalar>>& vertices) {
    if (vertices.empty()) throw InvalidArgument("vertices", "need at least one vertex");
    Matrix<Scalar> v(vertices.front().size(), static_cast<Eigen::Index>(vertices.size()));
    for (std::size_t j = 0; j < vertices.size(); ++j) {
      if (vertices[j].size() != v.rows())
        throw DimensionMismatch("polytope vertices have different dimensions");
      v.col(static_cast<Eigen::Index>(j)) = vertices[j];
    }
    return polytope(std::move(v));
  }

  Eigen::Index dim() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Box<Scalar>>) return s.lower.size();
          else if constexpr (std::is_same_v<T, Ball<Scalar>>) return s.center.size();
          else if constexpr (std::is_same_v<T, Ellipsoid<Scalar>>) return s.center().size();
          else return s.vertices.rows();
        },
        data_);
  }

  SetKind kind() const { return static_cast<SetKind>(data_.index()); }
  const Variant& data() const { return data_; }

 private:
  explicit ConvexSet(Variant data) : data_(std::move(data)) {}
  Variant data_;
};

template <typename Scalar>
struct ProjectionOptions {
  Scalar tol = Scalar(1e-10);     // ellipsoid stationarity residual
  Scalar fw_gap = Scalar(1e-12);  // polytope Frank-Wolfe duality gap (0: run to rounding level)
  int max_iters = 100000;
};

namespace detail {

template <typename Scalar>
void check_dim(const ConvexSet<Scalar>& set, Eigen::Index n) {
  if (set.dim() != n)
    throw DimensionMismatch("vector of dimension " + std::to_string(n) +
                            " used with a set of dimension " + std::to_string(set.dim()));
}

template <typename Scalar>
Scalar ellipsoid_level(const Ellipsoid<Scalar>& e, const VectorRef<Scalar>& x) {
  const Vector<Scalar> z = e.eigenvectors().transpose() * (x - e.center());
  return (z.array().square() / e.eigenvalues().array()).sum();
}

template <typename Scalar>
Vector<Scalar> project_ellipsoid(const Ellipsoid<Scalar>& e, const VectorRef<Scalar>& x,
                                 const ProjectionOptions<Scalar>& opts) {
  const Vector<Scalar> z = e.eigenvectors().transpose() * (x - e.center());
  const auto& lambda = e.eigenvalues().array();
  if ((z.array().square() / lambda).sum() <= Scalar(1)) return x;

  // Newton on g(mu) = sum lambda_i z_i^2 / (lambda_i + mu)^2 - 1, which is
  // convex and decreasing on mu >= 0, so iterates from mu = 0 increase
  // monotonically towards the root.
  const auto wz2 = (lambda * z.array().square()).eval();
  Scalar mu = 0;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  for (int it = 0; it < opts.max_iters; ++it) {
    const auto denom = (lambda + mu).eval();
    residual = (wz2 / denom.square()).sum() - Scalar(1);
    const Scalar slope = Scalar(-2) * (wz2 / denom.cube()).sum();
    const Scalar next = mu - residual / slope;
    if (std::abs(residual) <= opts.tol) {
      // One more Newton step is free and usually lands at rounding level.
      const auto final_denom = (lambda + std::max(mu, next)).eval();
      const Vector<Scalar> y = (lambda * z.array() / final_denom).matrix();
      return e.center() + e.eigenvectors() * y;
    }
    if (!(next > mu)) {
      // Stalled at floating-point resolution; the residual cannot shrink further.
      const Vector<Scalar> y = (lambda * z.array() / denom).matrix();
      if (std::abs(residual) <= Scalar(64) * std::numeric_limits<Scalar>::epsilon())
        return e.center() + e.eigenvectors() * y;
      break;
    }
    mu = next;
  }
  throw NonConvergence("ellipsoid projection", static_cast<double>(residual));
}

/// Active-set state of a polytope projection, reusable as a warm start.
template <typename Scalar>
struct SimplexWeights {
  Vector<Scalar> lambda;  // convex weights over the vertices
};

// Minimize ||V lambda - x||^2 over the simplex by Frank-Wolfe with away steps.
// After every step the iterate is pulled towards the minimizer over the affine
// hull of the active vertices (Wolfe's minor cycle), which makes the active
// set converge in finitely many steps and gives machine-precision answers
// once it is found.
template <typename Scalar>
Vector<Scalar> project_polytope(const Polytope<Scalar>& poly, const VectorRef<Scalar>& x,
                                const ProjectionOptions<Scalar>& opts,
                                SimplexWeights<Scalar>* warm = nullptr) {
  const Matrix<Scalar>& v = poly.vertices;
  const Eigen::Index m = v.cols();
  if (m == 1) {
    if (warm) warm->lambda = Vector<Scalar>::Ones(1);
    return v.col(0);
  }

  Vector<Scalar> lambda;
  if (warm && warm->lambda.size() == m) {
    lambda = warm->lambda;
  } else {
    Eigen::Index nearest = 0;
    (v.colwise() - x).colwise().squaredNorm().minCoeff(&nearest);
    lambda = Vector<Scalar>::Zero(m);
    lambda(nearest) = 1;
  }

  const Scalar scale2 = std::max<Scalar>(
      {Scalar(1), x.squaredNorm(), v.colwise().squaredNorm().maxCoeff()});
  const Scalar gap_floor = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale2;
  const Scalar target = std::max(opts.fw_gap, gap_floor);

  Vector<Scalar> p = v * lambda;
  Scalar gap = std::numeric_limits<Scalar>::infinity();
  for (int it = 0; it < opts.max_iters; ++it) {
    Vector<Scalar> r = p - x;
    const Vector<Scalar> grad = v.transpose() * r;  // half the true gradient
    const Scalar at_lambda = grad.dot(lambda);
    Eigen::Index fw = 0;
    grad.minCoeff(&fw);
    gap = Scalar(2) * (at_lambda - grad(fw));
    if (gap <= target) {
      if (warm) warm->lambda = lambda;
      return p;
    }

    Eigen::Index away = -1;
    for (Eigen::Index j = 0; j < m; ++j)
      if (lambda(j) > 0 && (away < 0 || grad(j) > grad(away))) away = j;
    const Scalar away_gap = Scalar(2) * (grad(away) - at_lambda);

    Vector<Scalar> dir_lambda;
    Scalar max_step;
    if (gap >= away_gap || lambda(away) >= Scalar(1)) {
      dir_lambda = -lambda;
      dir_lambda(fw) += 1;
      max_step = 1;
    } else {
      dir_lambda = lambda;
      dir_lambda(away) -= 1;
      max_step = lambda(away) / (Scalar(1) - lambda(away));
    }
    const Vector<Scalar> dir = v * dir_lambda;
    const Scalar dd = dir.squaredNorm();
    if (dd <= Scalar(0)) break;
    const Scalar step = std::clamp(-r.dot(dir) / dd, Scalar(0), max_step);
    lambda += step * dir_lambda;
    for (Eigen::Index j = 0; j < m; ++j)
      if (lambda(j) < std::numeric_limits<Scalar>::epsilon()) lambda(j) = 0;
    lambda /= lambda.sum();

    // Minor cycles: minimizer over the affine hull of the active set, then
    // back off to the simplex boundary and drop vertices until it is feasible.
    for (int minor = 0; minor < m; ++minor) {
      std::vector<Eigen::Index> active;
      for (Eigen::Index j = 0; j < m; ++j)
        if (lambda(j) > 0) active.push_back(j);
      const auto k = static_cast<Eigen::Index>(active.size());
      if (k <= 1) break;
      Matrix<Scalar> e(v.rows(), k - 1);
      for (Eigen::Index j = 1; j < k; ++j) e.col(j - 1) = v.col(active[j]) - v.col(active[0]);
      const Vector<Scalar> rhs = x - v.col(active[0]);
      const Vector<Scalar> coef = e.completeOrthogonalDecomposition().solve(rhs);
      Vector<Scalar> mu = Vector<Scalar>::Zero(m);
      mu(active[0]) = Scalar(1) - coef.sum();
      for (Eigen::Index j = 1; j < k; ++j) mu(active[j]) = coef(j - 1);
      if (!mu.allFinite()) break;
      if (mu.minCoeff() >= 0) {
        if ((v * mu - x).squaredNorm() <= (v * lambda - x).squaredNorm()) lambda = mu;
        break;
      }
      Scalar t = 1;
      for (Eigen::Index j : active)
        if (mu(j) < 0) t = std::min(t, lambda(j) / (lambda(j) - mu(j)));
      lambda += t * (mu - lambda);
      for (Eigen::Index j = 0; j < m; ++j)
        if (lambda(j) <= std::numeric_limits<Scalar>::epsilon()) lambda(j) = 0;
      lambda /= lambda.sum();
    }
    p = v * lambda;
  }
  if (warm) warm->lambda = lambda;
  throw NonConvergence("polytope projection", static_cast<double>(gap));
}

}  // namespace detail

/// Euclidean projection of `x` onto `set`.
template <typename Scalar>
Vector<Scalar> project(const ConvexSet<Scalar>& set, const VectorRef<Scalar>& x,
                       const ProjectionOptions<Scalar>& opts = {}) {
  detail::check_dim(set, x.size());
  return std::visit(
      [&](const auto& s) -> Vector<Scalar> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box<Scalar>>) {
          return x.cwiseMax(s.lower).cwiseMin(s.upper);
        } else if constexpr (std::is_same_v<T, Ball<Scalar>>) {
          const Vector<Scalar> diff = x - s.center;
          const Scalar norm = diff.norm();
          if (norm <= s.radius) return x;
          return s.center + diff * (s.radius / norm);
        } else if constexpr (std::is_same_v<T, Ellipsoid<Scalar>>) {
          return detail::project_ellipsoid(s, x, opts);
        } else {
          return detail::project_polytope(s, x, opts);
        }
      },
      set.data());
}

/// Projection with accuracy `tol`: the ellipsoid residual is `tol` and the
/// polytope Frank-Wolfe gap is `tol^2`, so the polytope answer lies within
/// `tol` of the exact projection.
template <typename Scalar>
Vector<Scalar> project(const ConvexSet<Scalar>& set, const VectorRef<Scalar>& x, Scalar tol) {
  if (!(tol > Scalar(0))) throw InvalidArgument("tol", "must be positive");
  ProjectionOptions<Scalar> opts;
  opts.tol = tol;
  opts.fw_gap = tol * tol;
  return project(set, x, opts);
}

/// sup_{y in set} d^T y.
template <typename Scalar>
Scalar support(const ConvexSet<Scalar>& set, const VectorRef<Scalar>& d) {
  detail::check_dim(set, d.size());
  return std::visit(
      [&](const auto& s) -> Scalar {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box<Scalar>>) {
          return ((d.array() > 0).select(s.upper.array(), s.lower.array()) * d.array()).sum();
        } else if constexpr (std::is_same_v<T, Ball<Scalar>>) {
          return d.dot(s.center) + s.radius * d.norm();
        } else if constexpr (std::is_same_v<T, Ellipsoid<Scalar>>) {
          const Vector<Scalar> z = s.eigenvectors().transpose() * d;
          return d.dot(s.center()) + std::sqrt((z.array().square() * s.eigenvalues().array()).sum());
        } else {
          return (s.vertices.transpose() * d).maxCoeff();
        }
      },
      set.data());
}

/// Membership with additive slack `tol` in the defining constraints. For a
/// polytope the slack is the Euclidean distance to the hull.
template <typename Scalar>
bool contains(const ConvexSet<Scalar>& set, const VectorRef<Scalar>& x, Scalar tol = Scalar(0)) {
  detail::check_dim(set, x.size());
  if (!(tol >= Scalar(0))) throw InvalidArgument("tol", "must be nonnegative");
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box<Scalar>>) {
          return ((x - s.lower).array() >= -tol).all() && ((s.upper - x).array() >= -tol).all();
        } else if constexpr (std::is_same_v<T, Ball<Scalar>>) {
          return (x - s.center).norm() <= s.radius + tol;
        } else if constexpr (std::is_same_v<T, Ellipsoid<Scalar>>) {
          return detail::ellipsoid_level(s, x) <= Scalar(1) + tol;
        } else {
          ProjectionOptions<Scalar> opts;
          opts.fw_gap = Scalar(0);
          const Vector<Scalar> p = detail::project_polytope(s, x, opts);
          // Hull reconstruction is only exact to rounding of the vertex data.
          const Scalar scale = std::max<Scalar>(
              {Scalar(1), x.norm(), std::sqrt(s.vertices.colwise().squaredNorm().maxCoeff())});
          const Scalar floor = Scalar(1e3) * std::numeric_limits<Scalar>::epsilon() * scale;
          return (p - x).norm() <= tol + floor;
        }
      },
      set.data());
}

/// A point that always belongs to the set: box midpoint, ball or ellipsoid
/// center, polytope vertex mean.
template <typename Scalar>
Vector<Scalar> anchor_point(const ConvexSet<Scalar>& set) {
  return std::visit(
      [](const auto& s) -> Vector<Scalar> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Box<Scalar>>) return (s.lower + s.upper) / Scalar(2);
        else if constexpr (std::is_same_v<T, Ball<Scalar>>) return s.center;
        else if constexpr (std::is_same_v<T, Ellipsoid<Scalar>>) return s.center();
        else return s.vertices.rowwise().mean();
      },
      set.data());
}

/// Projector that keeps warm-start state for repeated polytope projections.
/// Not shareable between threads; results equal `project` up to its tolerance.
template <typename Scalar>
class Projector {
 public:
  Projector(const ConvexSet<Scalar>& set, ProjectionOptions<Scalar> opts)
      : set_(&set), opts_(opts) {}

  Vector<Scalar> operator()(const VectorRef<Scalar>& x) {
    if (const auto* poly = std::get_if<Polytope<Scalar>>(&set_->data())) {
      detail::check_dim(*set_, x.size());
      return detail::project_polytope(*poly, x, opts_, &warm_);
    }
    return project(*set_, x, opts_);
  }

 private:
  const ConvexSet<Scalar>* set_;
  ProjectionOptions<Scalar> opts_;
  detail::SimplexWeights<Scalar> warm_;
};

}  // namespace convextest

#endif  // CONVEXTEST_CONVEX_SET_H
