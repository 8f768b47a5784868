#ifndef CONVEXTEST_IO_H
#define CONVEXTEST_IO_H

// JSON problem, scheme, pair and report files.
//
// Gaussian problem: {"dimension": d, "sigma": [[...]], "theta0": set, "theta1": set}
// with set one of
//   {"type": "box", "lower": [...], "upper": [...]}
//   {"type": "ball", "center": [...], "radius": r}
//   {"type": "ellipsoid", "center": [...], "shape": [[...]]}
//   {"type": "polytope", "vertices": [[...], ...]}    (one row per vertex)
// Discrete scheme: {"outcomes": K, "params": [{"pmf": [...], "label": -1|1}, ...]}
// Pair: {"theta0": [...], "theta1": [...]}; a solve report is accepted too
// (its theta0_star / theta1_star are used).

#include <json.hpp>

#include <string>
#include <utility>

#include "convextest/discrete.h"
#include "convextest/errors.h"
#include "convextest/gaussian.h"

namespace convextest {

using Json = nlohmann::ordered_json;

/// Malformed input. `field()` is a path such as "theta0.lower[1]" or "sigma".
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Throws ParseError("file", ...) when unreadable or not JSON.
Json read_json(const std::string& path);

/// Writes to a temporary file next to `path`, then renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

ConvexSet<double> parse_set(const Json& j, const std::string& field);
GaussianScheme<double> parse_gaussian_problem(const Json& j);
discrete::DiscreteScheme parse_discrete_scheme(const Json& j);
std::pair<Vector<double>, Vector<double>> parse_pair(const Json& j, Eigen::Index dim);

Json to_json(const ConvexSet<double>& set);
Json to_json(const GaussianScheme<double>& scheme);
Json to_json(const discrete::DiscreteScheme& scheme);
Json to_json(const AffineDetector<double>& detector);
Json to_json(const Eigen::VectorXd& v);

/// Bounds at (rho, delta): {"gjn", "exact_reference", "normalized_reference"}
/// with null for a bound outside its regime, plus "<name>_vacuous" flags.
Json bounds_json(double gap_tilde, double rho_star, double delta_raw, double delta_norm);

/// {theta0_star, theta1_star, rho, epsilon_star, delta_raw, delta_norm,
///  iterations, bounds, flags, detector}
Json solution_report(const SaddleSolution<double>& sol, double tol_delta);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace convextest

#endif  // CONVEXTEST_IO_H
