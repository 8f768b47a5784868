#include "convextest/sim_harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "convextest/monte_carlo.h"
#include "convextest/parallel.h"

namespace convextest {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

VectorXd gaussian_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

VectorXd unit_vector(std::mt19937_64& rng, Eigen::Index n) {
  VectorXd v = gaussian_vector(rng, n);
  while (v.norm() < 1e-8) v = gaussian_vector(rng, n);
  return v.normalized();
}

MatrixXd random_rotation(std::mt19937_64& rng, Eigen::Index n) {
  MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) g.col(j) = gaussian_vector(rng, n);
  return Eigen::HouseholderQR<MatrixXd>(g).householderQ();
}

// Random set contained in the ball of radius `radius` around `center`.
ConvexSet<double> random_set(std::mt19937_64& rng, const VectorXd& center, double radius) {
  const auto d = center.size();
  switch (uniform_int(rng, 0, 3)) {
    case 0: {
      VectorXd half(d);
      for (Eigen::Index i = 0; i < d; ++i)
        half(i) = uniform(rng, 0.1, 1.0) * radius / std::sqrt(static_cast<double>(d));
      return ConvexSet<double>::box(center - half, center + half);
    }
    case 1:
      return ConvexSet<double>::ball(center, uniform(rng, 0.3, 1.0) * radius);
    case 2: {
      const MatrixXd r = random_rotation(rng, d);
      VectorXd axes2(d);
      for (Eigen::Index i = 0; i < d; ++i) axes2(i) = std::pow(uniform(rng, 0.2, 1.0) * radius, 2);
      MatrixXd shape = r * axes2.asDiagonal() * r.transpose();
      shape = ((shape + shape.transpose()) / 2.0).eval();
      return ConvexSet<double>::ellipsoid(center, shape);
    }
    default: {
      const int m = uniform_int(rng, 2, static_cast<int>(d) + 3);
      MatrixXd v(d, m);
      for (int j = 0; j < m; ++j) v.col(j) = center + uniform(rng, 0.3, 1.0) * radius * unit_vector(rng, d);
      return ConvexSet<double>::polytope(v);
    }
  }
}

VectorXd dirichlet(std::mt19937_64& rng, int k) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  VectorXd p(k);
  for (int i = 0; i < k; ++i) p(i) = gamma(rng);
  if (p.sum() <= 0.0) p.setOnes();
  return p / p.sum();
}

VectorXd normalized_pmf(VectorXd p) {
  p /= p.sum();
  // Push the rounding residue into the largest entry so the sum is 1 to ~1 ulp.
  Eigen::Index top = 0;
  p.maxCoeff(&top);
  p(top) += 1.0 - p.sum();
  return p;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct RowBuilder {
  const CampaignColumns& cols;
  EvidenceRow& row;

  void set(const std::string& name, double v) {
    const auto it = std::find(cols.quantities.begin(), cols.quantities.end(), name);
    row.quantities[static_cast<std::size_t>(it - cols.quantities.begin())] = v;
  }
  void flag(const std::string& name, bool v) {
    const auto it = std::find(cols.flags.begin(), cols.flags.end(), name);
    row.flags[static_cast<std::size_t>(it - cols.flags.begin())] = v;
  }
  void violation(double v) { row.violation = std::max(row.violation, v); }
};

// Both sides of the saddle pair have error epsilon*, so the two runs are
// pooled into one estimate over 2n samples.
void gaussian_bounds_instance(const Campaign& c, std::mt19937_64& rng, RowBuilder& b) {
  const int d = uniform_int(rng, c.min_dim, c.max_dim);
  const auto scheme = random_gaussian_scheme(rng, d);
  b.row.description = std::string(to_string(scheme.theta0().kind())) + "/" +
                      to_string(scheme.theta1().kind());
  b.set("dim", d);
  SolverOptions<double> opts;
  opts.tol_delta = c.tol_delta;
  const auto sol = solve_closest_pair(scheme, opts);
  b.flag("converged", true);
  b.set("rho_star", sol.rho);
  b.set("epsilon_star", sol.epsilon_star);
  b.set("delta_raw", sol.certificate.delta_raw);
  b.set("delta_norm", sol.certificate.delta_norm);
  b.set("iterations", sol.iterations);
  b.flag("delta_within_tol", sol.certificate.delta_norm <= c.tol_delta);
  b.violation(sol.certificate.delta_norm - c.tol_delta);

  const Bound gjn = bound_gjn(sol.rho, sol.certificate.delta_raw);
  const Bound norm = bound_normalized_reference(sol.rho, sol.certificate.delta_norm);
  b.set("bound_gjn", gjn.value);
  b.set("bound_normalized_reference", norm.value);
  double exact_ref = kNaN;
  try {
    exact_ref = bound_exact_reference(sol.rho, sol.certificate.delta_raw).value;
  } catch (const InvalidRegime&) {
  }
  b.set("bound_exact_reference", exact_ref);
  const double slack = 1e-12;
  bool ordered = gjn.value >= sol.epsilon_star - slack && norm.value >= sol.epsilon_star - slack;
  if (!std::isnan(exact_ref)) ordered = ordered && exact_ref >= sol.epsilon_star - slack;
  b.flag("bounds_at_least_epsilon", ordered);

  const double h0 = sol.detector(sol.theta0_star);
  const double h1 = sol.detector(sol.theta1_star);
  const double sym = std::abs(h0 + h1) - 1e-10 * std::max(1.0, std::abs(h0));
  b.flag("detector_midpoint", sym <= 0.0);
  b.violation(sym);

  const std::uint64_t mc_seed = b.row.seed ^ 0x9e3779b97f4a7c15ULL;
  McOptions mc_opts;
  mc_opts.threads = 1;
  const auto e0 = mc_error(sol.detector, sol.theta0_star, scheme.sigma(), -1, c.mc_samples, mc_seed, mc_opts);
  const auto e1 = mc_error(sol.detector, sol.theta1_star, scheme.sigma(), 1, c.mc_samples, mc_seed + 1, mc_opts);
  const double n = 2.0 * static_cast<double>(c.mc_samples);
  const double p = static_cast<double>(e0.errors + e1.errors) / n;
  const double se = std::sqrt(p * (1.0 - p) / n);
  // The empirical stderr is 0 when no error is observed; fall back to the
  // binomial sd at epsilon* so tiny error rates are not flagged spuriously.
  const double sigma = std::max(se, std::sqrt(sol.epsilon_star * (1.0 - sol.epsilon_star) / n));
  const double z = sigma > 0.0 ? std::abs(p - sol.epsilon_star) / sigma : 0.0;
  b.set("mc_estimate", p);
  b.set("mc_stderr", se);
  b.set("mc_z", z);
  b.flag("mc_within_3se", z <= 3.0);
}

void sandwich_instance(const Campaign& c, std::mt19937_64& rng, RowBuilder& b) {
  const int d = uniform_int(rng, c.min_dim, c.max_dim);
  const auto scheme = random_gaussian_scheme(rng, d);
  b.row.description = std::string(to_string(scheme.theta0().kind())) + "/" +
                      to_string(scheme.theta1().kind());
  b.set("dim", d);
  SolverOptions<double> opts;
  opts.tol_delta = c.exact_tol_delta;
  const auto exact = solve_closest_pair(scheme, opts);
  b.set("rho_star", exact.rho);
  b.set("exact_delta_norm", exact.certificate.delta_norm);

  const double scale = (exact.theta0_star - exact.theta1_star).norm();
  bool raw_lower = true, raw_upper = true, norm_lower = true, norm_upper = true;
  int checks = 0, upper_evaluated = 0, degenerate = 0;
  double min_delta = std::numeric_limits<double>::infinity(), max_delta = 0.0;
  for (int k = 0; k < c.perturbations; ++k) {
    const double size = scale * std::pow(10.0, uniform(rng, -3.0, 0.0)) /
                        std::sqrt(static_cast<double>(d));
    const VectorXd t0 = project(scheme.theta0(), VectorRef<double>(exact.theta0_star + size * gaussian_vector(rng, d)));
    const VectorXd t1 = project(scheme.theta1(), VectorRef<double>(exact.theta1_star + size * gaussian_vector(rng, d)));
    SandwichReport<double> rep;
    try {
      rep = sandwich_check(scheme, exact, VectorRef<double>(t0), VectorRef<double>(t1));
    } catch (const DegeneratePair&) {
      ++degenerate;
      continue;
    }
    ++checks;
    min_delta = std::min(min_delta, rep.delta_norm);
    max_delta = std::max(max_delta, rep.delta_norm);
    raw_lower = raw_lower && rep.raw_lower;
    raw_upper = raw_upper && rep.raw_upper;
    norm_lower = norm_lower && rep.norm_lower;
    if (rep.norm_upper) {
      ++upper_evaluated;
      norm_upper = norm_upper && *rep.norm_upper;
    }
    b.violation(rep.worst_violation());
  }
  b.set("checks", checks);
  b.set("norm_upper_evaluated", upper_evaluated);
  b.set("degenerate", degenerate);
  b.set("min_delta_norm", checks ? min_delta : kNaN);
  b.set("max_delta_norm", checks ? max_delta : kNaN);
  b.flag("raw_lower", raw_lower);
  b.flag("raw_upper", raw_upper);
  b.flag("norm_lower", norm_lower);
  if (upper_evaluated > 0) b.flag("norm_upper", norm_upper);
}

void reduction_instance(const Campaign& c, std::mt19937_64& rng, RowBuilder& b) {
  int attempts = 0;
  const auto scheme = random_reduction_scheme(rng, c.max_outcomes, c.max_params, &attempts);
  b.set("outcomes", scheme.outcomes());
  b.set("params", scheme.size());
  b.set("attempts", attempts);
  const auto closest = discrete::hellinger_closest_pair(scheme);
  const auto pair = discrete::optimal_detector_for_pair(scheme.pmf(closest.i0), scheme.pmf(closest.i1));
  b.set("closest_i0", closest.i0);
  b.set("closest_i1", closest.i1);
  b.set("affinity", closest.affinity);
  b.set("analytic_value", pair.value);

  discrete::SubgradientOptions opts;
  opts.tol = c.product_tol;
  const auto saddle = discrete::saddle_solve_product(scheme, opts);
  b.flag("converged", true);
  b.set("solver_i0", saddle.i0);
  b.set("solver_i1", saddle.i1);
  b.set("product_value", saddle.value);
  const double residual = discrete::equivalence_residual(saddle.detector.values, pair.detector.values);
  b.set("residual", residual);
  b.flag("pair_matches", saddle.i0 == closest.i0 && saddle.i1 == closest.i1);
  b.flag("residual_ok", residual <= 1e-6);
  b.flag("value_matches", std::abs(saddle.value - pair.value) <= 1e-8);
  b.violation(residual - 1e-6);
  b.violation(std::abs(saddle.value - pair.value) - 1e-8);
}

void surrogate_instance(const Campaign& c, std::mt19937_64& rng, RowBuilder& b) {
  const int k = uniform_int(rng, c.min_outcomes, c.max_outcomes);
  const int m = uniform_int(rng, 2, c.max_params);
  const auto scheme = random_discrete_scheme(rng, k, m, 0.01);
  b.set("outcomes", k);
  b.set("params", m);

  discrete::SubgradientOptions opts;
  opts.tol = 1e-7;
  const auto product = discrete::saddle_solve_product(scheme, opts);
  b.flag("product_converged", true);
  const double at_product = discrete::direct_objective(scheme, product.detector);
  discrete::DirectOptions dopts;
  dopts.seed = b.row.seed;
  dopts.warm_starts = {product.detector};
  const auto direct = discrete::direct_solve(scheme, dopts);
  const double wce_product = discrete::worst_case_error(scheme, product.detector);
  b.set("product_value", product.value);
  b.set("direct_value_at_product", at_product);
  b.set("direct_value", direct.value);
  b.set("wce_product", wce_product);
  b.set("wce_direct", discrete::worst_case_error(scheme, direct.detector));
  b.flag("direct_le_product", direct.value <= at_product + dopts.tol);
  const double moment_bound = std::exp(product.value / 2.0);
  b.flag("exp_moment_bound", wce_product <= moment_bound + 1e-9);
  b.violation(wce_product - moment_bound - 1e-9);

  const auto rows = discrete::compare_surrogates(
      scheme, {discrete::Loss::hinge, discrete::Loss::exp, discrete::Loss::logistic}, opts);
  for (const auto& r : rows) {
    const std::string name = discrete::to_string(r.loss);
    b.set("value_" + name, r.value);
    b.set("wce_" + name, r.worst_case_error);
    b.flag(name + "_converged", r.converged);
    // With overlapping hulls (value 0) every detector sign pattern is optimal,
    // so there is nothing to compare.
    if (r.loss == discrete::Loss::exp && product.value < -1e-9)
      b.flag("exp_matches_product", std::abs(r.worst_case_error - wce_product) <= 1e-12);
  }
}

}  // namespace

const char* to_string(CampaignKind kind) {
  switch (kind) {
    case CampaignKind::gaussian_bounds: return "gaussian_bounds";
    case CampaignKind::sandwich: return "sandwich";
    case CampaignKind::reduction_equiv: return "reduction_equiv";
    case CampaignKind::surrogate_table: return "surrogate_table";
  }
  return "unknown";
}

CampaignKind parse_campaign_kind(const std::string& name) {
  for (auto k : {CampaignKind::gaussian_bounds, CampaignKind::sandwich,
                 CampaignKind::reduction_equiv, CampaignKind::surrogate_table})
    if (name == to_string(k)) return k;
  throw InvalidArgument("kind", "unknown campaign kind '" + name + "'");
}

CampaignColumns campaign_columns(CampaignKind kind) {
  switch (kind) {
    case CampaignKind::gaussian_bounds:
      return {{"dim", "rho_star", "epsilon_star", "delta_raw", "delta_norm", "iterations",
               "bound_gjn", "bound_exact_reference", "bound_normalized_reference", "mc_estimate",
               "mc_stderr", "mc_z"},
              {"converged", "delta_within_tol", "bounds_at_least_epsilon", "detector_midpoint",
               "mc_within_3se"}};
    case CampaignKind::sandwich:
      return {{"dim", "rho_star", "exact_delta_norm", "checks", "norm_upper_evaluated",
               "degenerate", "min_delta_norm", "max_delta_norm"},
              {"raw_lower", "raw_upper", "norm_lower", "norm_upper"}};
    case CampaignKind::reduction_equiv:
      return {{"outcomes", "params", "attempts", "closest_i0", "closest_i1", "affinity",
               "analytic_value", "solver_i0", "solver_i1", "product_value", "residual"},
              {"converged", "pair_matches", "residual_ok", "value_matches"}};
    case CampaignKind::surrogate_table:
      return {{"outcomes", "params", "product_value", "direct_value_at_product", "direct_value",
               "wce_product", "wce_direct", "value_hinge", "wce_hinge", "value_exp", "wce_exp",
               "value_logistic", "wce_logistic"},
              {"product_converged", "direct_le_product", "exp_moment_bound", "hinge_converged",
               "exp_converged", "logistic_converged", "exp_matches_product"}};
  }
  return {};
}

bool EvidenceRow::passed() const {
  if (status != "ok") return false;
  return std::none_of(flags.begin(), flags.end(), [](const auto& f) { return f && !*f; });
}

std::uint64_t instance_seed(std::uint64_t campaign_seed, int instance) {
  // splitmix64 of (seed, instance)
  std::uint64_t z = campaign_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(instance) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GaussianScheme<double> random_gaussian_scheme(std::mt19937_64& rng, int dim) {
  if (dim < 1) throw InvalidArgument("dim", "must be positive");
  const MatrixXd q = random_rotation(rng, dim);
  VectorXd eig(dim);
  for (int i = 0; i < dim; ++i) eig(i) = std::pow(10.0, uniform(rng, -1.5, 1.5));
  MatrixXd sigma = q * eig.asDiagonal() * q.transpose();
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();

  const double r0 = uniform(rng, 0.5, 1.5);
  const double r1 = uniform(rng, 0.5, 1.5);
  const VectorXd c0 = uniform(rng, -2.0, 2.0) * unit_vector(rng, dim);
  const VectorXd c1 = c0 + (r0 + r1 + uniform(rng, 0.2, 2.0)) * unit_vector(rng, dim);
  auto set0 = random_set(rng, c0, r0);
  auto set1 = random_set(rng, c1, r1);
  return GaussianScheme<double>(sigma, std::move(set0), std::move(set1));
}

discrete::DiscreteScheme random_discrete_scheme(std::mt19937_64& rng, int outcomes, int params,
                                                double floor) {
  if (params < 2) throw InvalidArgument("params", "need at least two parameter points");
  MatrixXd pmfs(outcomes, params);
  std::vector<int> labels(static_cast<std::size_t>(params));
  const int n0 = uniform_int(rng, 1, params - 1);
  for (int j = 0; j < params; ++j) {
    VectorXd p = dirichlet(rng, outcomes);
    p = (1.0 - floor) * p + VectorXd::Constant(outcomes, floor / outcomes);
    pmfs.col(j) = normalized_pmf(p);
    labels[static_cast<std::size_t>(j)] = j < n0 ? -1 : 1;
  }
  return discrete::DiscreteScheme(pmfs, labels);
}

discrete::DiscreteScheme random_reduction_scheme(std::mt19937_64& rng, int max_outcomes,
                                                 int max_params, int* attempts) {
  for (int attempt = 1;; ++attempt) {
    const int k = uniform_int(rng, 2, max_outcomes);
    const int n0 = uniform_int(rng, 1, std::min(3, max_params - 1));
    const int n1 = uniform_int(rng, 1, std::min(3, max_params - n0));
    const VectorXd p = normalized_pmf(0.9 * dirichlet(rng, k) + VectorXd::Constant(k, 0.1 / k));
    const VectorXd q = normalized_pmf(0.9 * dirichlet(rng, k) + VectorXd::Constant(k, 0.1 / k));
    const VectorXd tilt = (p.array() / q.array()).log().matrix();

    // Extra grid points: the base pmf tilted away from the other hypothesis,
    // with multiplicative noise.
    auto spread = [&](const VectorXd& base, const VectorXd& away) {
      const double t = uniform(rng, 0.1, 1.0);
      VectorXd v = (base.array().log() + t * away.array() +
                    0.3 * gaussian_vector(rng, k).array()).exp().matrix();
      return normalized_pmf(v);
    };
    MatrixXd pmfs(k, n0 + n1);
    std::vector<int> labels;
    pmfs.col(0) = p;
    for (int j = 1; j < n0; ++j) pmfs.col(j) = spread(p, tilt);
    pmfs.col(n0) = q;
    for (int j = 1; j < n1; ++j) pmfs.col(n0 + j) = spread(q, (-tilt).eval());
    labels.assign(static_cast<std::size_t>(n0), -1);
    labels.insert(labels.end(), static_cast<std::size_t>(n1), 1);
    // Shuffle the grid so the base pair does not always sit first.
    std::vector<int> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::shuffle(order.begin(), order.end(), rng);
    MatrixXd shuffled(k, n0 + n1);
    std::vector<int> shuffled_labels(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      shuffled.col(static_cast<Eigen::Index>(i)) = pmfs.col(order[i]);
      shuffled_labels[i] = labels[static_cast<std::size_t>(order[i])];
    }
    discrete::DiscreteScheme scheme(shuffled, shuffled_labels);

    const auto closest = discrete::hellinger_closest_pair(scheme);
    const auto lrt = discrete::optimal_detector_for_pair(scheme.pmf(closest.i0), scheme.pmf(closest.i1));
    const double half_value = std::log(closest.affinity);
    bool strict = true;
    for (int i = 0; i < scheme.size() && strict; ++i) {
      if (i == closest.i0 || i == closest.i1) continue;
      strict = discrete::log_g_exp(scheme, lrt.detector, i) < half_value - 1e-3;
    }
    if (strict) {
      if (attempts) *attempts = attempt;
      return scheme;
    }
  }
}

std::vector<EvidenceRow> run_campaign(const Campaign& c) {
  if (c.n_instances < 1) throw InvalidArgument("n_instances", "must be at least 1");
  if (c.min_dim < 1 || c.max_dim < c.min_dim) throw InvalidArgument("dims", "invalid range");
  if (c.min_outcomes < 2 || c.max_outcomes < c.min_outcomes)
    throw InvalidArgument("outcomes", "invalid range");
  if (c.max_params < 2) throw InvalidArgument("max_params", "must be at least 2");
  const CampaignColumns cols = campaign_columns(c.kind);
  std::vector<EvidenceRow> rows(static_cast<std::size_t>(c.n_instances));
  parallel_for(rows.size(), c.threads, [&](std::size_t i) {
    EvidenceRow& row = rows[i];
    row.instance = static_cast<int>(i);
    row.seed = instance_seed(c.seed, row.instance);
    row.quantities.assign(cols.quantities.size(), kNaN);
    row.flags.assign(cols.flags.size(), std::nullopt);
    std::mt19937_64 rng(row.seed);
    RowBuilder b{cols, row};
    try {
      switch (c.kind) {
        case CampaignKind::gaussian_bounds: gaussian_bounds_instance(c, rng, b); break;
        case CampaignKind::sandwich: sandwich_instance(c, rng, b); break;
        case CampaignKind::reduction_equiv: reduction_instance(c, rng, b); break;
        case CampaignKind::surrogate_table: surrogate_instance(c, rng, b); break;
      }
    } catch (const std::exception& e) {
      row.status = sanitize(e.what());
    }
  });
  return rows;
}

CampaignSummary summarize(const Campaign& c, const std::vector<EvidenceRow>& rows) {
  CampaignSummary s;
  s.campaign = to_string(c.kind);
  s.n_instances = static_cast<int>(rows.size());
  s.worst_violation = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    s.passed += r.passed();
    if (r.status == "ok") s.worst_violation = std::max(s.worst_violation, r.violation);
  }
  if (rows.empty() || !std::isfinite(s.worst_violation)) s.worst_violation = 0.0;
  s.pass_rate = rows.empty() ? 0.0 : static_cast<double>(s.passed) / static_cast<double>(rows.size());

  const auto cols = campaign_columns(c.kind);
  auto column = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::find(cols.quantities.begin(), cols.quantities.end(), name) - cols.quantities.begin());
  };
  auto flag_column = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(cols.flags.begin(), cols.flags.end(), name) -
                                    cols.flags.begin());
  };
  const auto errors = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.status != "ok"; });
  s.extras.emplace_back("errors", static_cast<double>(errors));
  if (c.kind == CampaignKind::gaussian_bounds) {
    const auto f = flag_column("mc_within_3se");
    int covered = 0, evaluated = 0;
    for (const auto& r : rows)
      if (r.flags[f]) ++evaluated, covered += *r.flags[f];
    s.extras.emplace_back("mc_coverage", evaluated ? static_cast<double>(covered) / evaluated : 0.0);
  } else if (c.kind == CampaignKind::sandwich) {
    double checks = 0, upper = 0;
    for (const auto& r : rows) {
      if (!std::isnan(r.quantities[column("checks")])) checks += r.quantities[column("checks")];
      if (!std::isnan(r.quantities[column("norm_upper_evaluated")]))
        upper += r.quantities[column("norm_upper_evaluated")];
    }
    s.extras.emplace_back("perturbations_checked", checks);
    s.extras.emplace_back("norm_upper_evaluated", upper);
  } else if (c.kind == CampaignKind::reduction_equiv) {
    double worst = 0.0;
    for (const auto& r : rows)
      if (!std::isnan(r.quantities[column("residual")]))
        worst = std::max(worst, r.quantities[column("residual")]);
    s.extras.emplace_back("max_residual", worst);
  } else {
    int better = 0;
    for (const auto& r : rows)
      if (r.quantities[column("direct_value")] < r.quantities[column("direct_value_at_product")] - 1e-7)
        ++better;
    s.extras.emplace_back("direct_strictly_better", better);
  }
  return s;
}

std::string to_csv(CampaignKind kind, const std::vector<EvidenceRow>& rows) {
  const auto cols = campaign_columns(kind);
  std::ostringstream out;
  out << "instance,seed,status,description";
  for (const auto& q : cols.quantities) out << ',' << q;
  for (const auto& f : cols.flags) out << ',' << f;
  out << ",violation\n";
  for (const auto& r : rows) {
    out << r.instance << ',' << r.seed << ',' << r.status << ',' << r.description;
    for (double v : r.quantities) out << ',' << csv_number(v);
    for (const auto& f : r.flags) out << ',' << (f ? (*f ? "true" : "false") : "");
    out << ',' << csv_number(r.violation) << '\n';
  }
  return out.str();
}

std::string to_json(const CampaignSummary& s) {
  nlohmann::ordered_json j;
  j["campaign"] = s.campaign;
  j["n_instances"] = s.n_instances;
  j["passed"] = s.passed;
  j["pass_rate"] = s.pass_rate;
  j["worst_violation"] = s.worst_violation;
  for (const auto& [k, v] : s.extras) j[k] = v;
  return j.dump(2) + "\n";
}

}  // namespace convextest
