#include "convextest/io.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <variant>

#include <filesystem>

namespace convextest {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const Json& member(const Json& j, const std::string& key, const std::string& field) {
  if (!j.is_object()) throw ParseError(field, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(field.empty() ? key : field + "." + key, "missing");
  return *it;
}

std::string join(const std::string& field, const std::string& key) {
  return field.empty() ? key : field + "." + key;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(field, "must be finite");
  return v;
}

int integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ParseError(field, "expected an integer");
  return j.get<int>();
}

VectorXd vector(const Json& j, const std::string& field, Eigen::Index expected = -1) {
  if (!j.is_array()) throw ParseError(field, "expected an array of numbers");
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected)
    throw ParseError(field, "expected length " + std::to_string(expected) + ", got " +
                                std::to_string(j.size()));
  if (j.empty()) throw ParseError(field, "empty");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

// Rows of a nested array; all rows must have length `cols` (or agree).
MatrixXd matrix(const Json& j, const std::string& field, Eigen::Index rows = -1,
                Eigen::Index cols = -1) {
  if (!j.is_array() || j.empty()) throw ParseError(field, "expected a nonempty array of rows");
  if (rows >= 0 && static_cast<Eigen::Index>(j.size()) != rows)
    throw ParseError(field, "expected " + std::to_string(rows) + " rows, got " +
                                std::to_string(j.size()));
  MatrixXd m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const VectorXd row = vector(j[i], field + "[" + std::to_string(i) + "]", cols);
    if (i == 0) {
      cols = row.size();
      m.resize(static_cast<Eigen::Index>(j.size()), cols);
    }
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

// Rethrows validation errors from the set and scheme constructors with the
// file path of the offending field.
template <typename F>
auto with_field(const std::string& prefix, const std::string& fallback, F&& make) {
  try {
    return make();
  } catch (const ParseError&) {
    throw;
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    throw ParseError(join(prefix, e.field()), colon == std::string::npos ? what : what.substr(colon + 2));
  } catch (const DimensionMismatch& e) {
    throw ParseError(fallback, e.what());
  }
}

}  // namespace

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("file", "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("file", "'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
  }
}

ConvexSet<double> parse_set(const Json& j, const std::string& field) {
  const Json& type = member(j, "type", field);
  if (!type.is_string()) throw ParseError(join(field, "type"), "expected a string");
  const std::string t = type.get<std::string>();
  return with_field(field, field, [&] {
    if (t == "box") {
      VectorXd lower = vector(member(j, "lower", field), join(field, "lower"));
      VectorXd upper = vector(member(j, "upper", field), join(field, "upper"), lower.size());
      return ConvexSet<double>::box(std::move(lower), std::move(upper));
    }
    if (t == "ball") {
      VectorXd center = vector(member(j, "center", field), join(field, "center"));
      return ConvexSet<double>::ball(std::move(center),
                                     number(member(j, "radius", field), join(field, "radius")));
    }
    if (t == "ellipsoid") {
      VectorXd center = vector(member(j, "center", field), join(field, "center"));
      MatrixXd shape = matrix(member(j, "shape", field), join(field, "shape"), center.size(),
                              center.size());
      return ConvexSet<double>::ellipsoid(std::move(center), std::move(shape));
    }
    if (t == "polytope") {
      MatrixXd rows = matrix(member(j, "vertices", field), join(field, "vertices"));
      return ConvexSet<double>::polytope(MatrixXd(rows.transpose()));
    }
    throw ParseError(join(field, "type"), "unknown set type '" + t + "'");
  });
}

GaussianScheme<double> parse_gaussian_problem(const Json& j) {
  if (!j.is_object()) throw ParseError("problem", "expected a JSON object");
  const int d = integer(member(j, "dimension", ""), "dimension");
  if (d < 1) throw ParseError("dimension", "must be positive");
  MatrixXd sigma = matrix(member(j, "sigma", ""), "sigma", d, d);
  ConvexSet<double> t0 = parse_set(member(j, "theta0", ""), "theta0");
  ConvexSet<double> t1 = parse_set(member(j, "theta1", ""), "theta1");
  if (t0.dim() != d) throw ParseError("theta0", "dimension does not match \"dimension\"");
  if (t1.dim() != d) throw ParseError("theta1", "dimension does not match \"dimension\"");
  return with_field("", "sigma", [&] {
    return GaussianScheme<double>(std::move(sigma), std::move(t0), std::move(t1));
  });
}

discrete::DiscreteScheme parse_discrete_scheme(const Json& j) {
  if (!j.is_object()) throw ParseError("scheme", "expected a JSON object");
  const int k = integer(member(j, "outcomes", ""), "outcomes");
  if (k < 1) throw ParseError("outcomes", "must be positive");
  const Json& params = member(j, "params", "");
  if (!params.is_array() || params.empty()) throw ParseError("params", "expected a nonempty array");
  MatrixXd pmfs(k, static_cast<Eigen::Index>(params.size()));
  std::vector<int> labels;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string field = "params[" + std::to_string(i) + "]";
    pmfs.col(static_cast<Eigen::Index>(i)) = vector(member(params[i], "pmf", field), field + ".pmf", k);
    labels.push_back(integer(member(params[i], "label", field), field + ".label"));
  }
  return with_field("", "params", [&] { return discrete::DiscreteScheme(std::move(pmfs), std::move(labels)); });
}

std::pair<Vector<double>, Vector<double>> parse_pair(const Json& j, Eigen::Index dim) {
  if (!j.is_object()) throw ParseError("pair", "expected a JSON object");
  const bool report = j.contains("theta0_star") && !j.contains("theta0");
  const std::string k0 = report ? "theta0_star" : "theta0";
  const std::string k1 = report ? "theta1_star" : "theta1";
  return {vector(member(j, k0, ""), k0, dim), vector(member(j, k1, ""), k1, dim)};
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

namespace {

Json rows_json(const MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(VectorXd(m.row(i).transpose())));
  return a;
}

}  // namespace

Json to_json(const ConvexSet<double>& set) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        Json j;
        if constexpr (std::is_same_v<T, Box<double>>) {
          j["type"] = "box";
          j["lower"] = to_json(s.lower);
          j["upper"] = to_json(s.upper);
        } else if constexpr (std::is_same_v<T, Ball<double>>) {
          j["type"] = "ball";
          j["center"] = to_json(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, Ellipsoid<double>>) {
          j["type"] = "ellipsoid";
          j["center"] = to_json(s.center());
          j["shape"] = rows_json(s.shape());
        } else {
          j["type"] = "polytope";
          j["vertices"] = rows_json(s.vertices.transpose());
        }
        return j;
      },
      set.data());
}

Json to_json(const GaussianScheme<double>& scheme) {
  Json j;
  j["dimension"] = scheme.dim();
  j["sigma"] = rows_json(scheme.sigma());
  j["theta0"] = to_json(scheme.theta0());
  j["theta1"] = to_json(scheme.theta1());
  return j;
}

Json to_json(const discrete::DiscreteScheme& scheme) {
  Json j;
  j["outcomes"] = scheme.outcomes();
  Json params = Json::array();
  for (int i = 0; i < scheme.size(); ++i)
    params.push_back(Json{{"pmf", to_json(scheme.pmf(i))}, {"label", scheme.label(i)}});
  j["params"] = std::move(params);
  return j;
}

Json to_json(const AffineDetector<double>& detector) {
  return Json{{"w", to_json(detector.w)}, {"c", detector.c + 0.0}};
}

Json bounds_json(double gap_tilde, double rho_star, double delta_raw, double delta_norm) {
  Json b;
  const Bound gjn = bound_gjn(gap_tilde, delta_raw);
  b["gjn"] = gjn.value;
  std::optional<Bound> exact;
  try {
    exact = bound_exact_reference(rho_star, delta_raw);
  } catch (const InvalidRegime&) {
  }
  b["exact_reference"] = exact ? Json(exact->value) : Json(nullptr);
  const Bound norm = bound_normalized_reference(rho_star, delta_norm);
  b["normalized_reference"] = norm.value;
  b["gjn_vacuous"] = gjn.vacuous;
  b["exact_reference_vacuous"] = exact ? Json(exact->vacuous) : Json(nullptr);
  b["normalized_reference_vacuous"] = norm.vacuous;
  return b;
}

Json solution_report(const SaddleSolution<double>& sol, double tol_delta) {
  const auto& cert = sol.certificate;
  Json j;
  j["theta0_star"] = to_json(sol.theta0_star);
  j["theta1_star"] = to_json(sol.theta1_star);
  j["rho"] = sol.rho;
  j["epsilon_star"] = sol.epsilon_star;
  j["delta_raw"] = cert.delta_raw;
  j["delta_norm"] = cert.delta_norm;
  j["iterations"] = sol.iterations;
  j["bounds"] = bounds_json(cert.gap, sol.rho, cert.delta_raw, cert.delta_norm);
  j["flags"] = Json{{"converged", true},
                    {"delta_within_tol", cert.delta_norm <= tol_delta},
                    {"any_bound_vacuous", j["bounds"]["gjn_vacuous"].get<bool>() ||
                                              j["bounds"]["normalized_reference_vacuous"].get<bool>() ||
                                              j["bounds"]["exact_reference_vacuous"] == true}};
  j["detector"] = to_json(sol.detector);
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace convextest
