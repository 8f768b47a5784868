#ifndef CONVEXTEST_ERRORS_H
#define CONVEXTEST_ERRORS_H

#include <stdexcept>
#include <string>

namespace convextest {

/// Input whose dimensions disagree with the set or scheme it is used with.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid set, scheme or option values. `field()` names the offending field.
class InvalidArgument : public std::invalid_argument {
 public:
  InvalidArgument(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// An iterative routine ran out of iterations. `residual()` is the last
/// value of its stopping criterion.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Closest-pair solver hit its iteration cap; carries the last certificate.
class SolverNonConvergence : public NonConvergence {
 public:
  SolverNonConvergence(double delta_raw, double delta_norm, double gap, int iterations)
      : NonConvergence("closest-pair solver hit max_iters after " +
                           std::to_string(iterations) + " iterations",
                       delta_norm),
        delta_raw_(delta_raw), delta_norm_(delta_norm), gap_(gap), iterations_(iterations) {}
  double delta_raw() const { return delta_raw_; }
  double delta_norm() const { return delta_norm_; }
  double gap() const { return gap_; }
  int iterations() const { return iterations_; }

 private:
  double delta_raw_, delta_norm_, gap_;
  int iterations_;
};

/// The two hypothesis sets intersect or touch, so no test separates them.
class OverlappingHypotheses : public std::runtime_error {
 public:
  OverlappingHypotheses(const std::string& what, double gap)
      : std::runtime_error(what), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

/// Candidate pair with (numerically) zero Mahalanobis gap.
class DegeneratePair : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bound evaluated outside the range where its formula is defined.
class InvalidRegime : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Outcome with mass under exactly one of two pmfs.
class ZeroMassOutcome : public std::domain_error {
 public:
  ZeroMassOutcome(const std::string& what, int outcome)
      : std::domain_error(what), outcome_(outcome) {}
  int outcome() const { return outcome_; }

 private:
  int outcome_;
};

}  // namespace convextest

#endif  // CONVEXTEST_ERRORS_H
