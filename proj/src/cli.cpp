#include "convextest/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "convextest/io.h"
#include "convextest/monte_carlo.h"
#include "convextest/sim_harness.h"

namespace convextest {

namespace {

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty())
    out << content;
  else
    write_atomic(path, content);
}

Json decisions_json(const discrete::TabulatedDetector& h) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < h.values.size(); ++i) a.push_back(h.decide(static_cast<int>(i)));
  return a;
}

SolverOptions<double> solver_options(double tol, int max_iters) {
  SolverOptions<double> opts;
  opts.tol_delta = tol;
  opts.max_iters = max_iters;
  return opts;
}

struct SolveArgs {
  std::string problem, out;
  double tol = 1e-8;
  int max_iters = 100000;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const auto scheme = parse_gaussian_problem(read_json(a.problem));
  const auto sol = solve_closest_pair(scheme, solver_options(a.tol, a.max_iters));
  emit(a.out, dump(solution_report(sol, a.tol)), out);
  return kExitOk;
}

struct CertifyArgs {
  std::string problem, pair, out;
  double reference_tol = 1e-11;
  int max_iters = 100000;
};

int cmd_certify(const CertifyArgs& a, std::ostream& out) {
  const auto scheme = parse_gaussian_problem(read_json(a.problem));
  const auto [t0, t1] = parse_pair(read_json(a.pair), scheme.dim());
  const auto cert = certificate(scheme, VectorRef<double>(t0), VectorRef<double>(t1));
  const auto exact = solve_closest_pair(scheme, solver_options(a.reference_tol, a.max_iters));
  const auto rep = sandwich_check(scheme, exact, VectorRef<double>(t0), VectorRef<double>(t1));

  Json j;
  j["theta0"] = to_json(t0);
  j["theta1"] = to_json(t1);
  // The certificate is defined for any pair; the inequalities assume feasibility.
  j["feasible"] = contains(scheme.theta0(), VectorRef<double>(t0), 1e-9) &&
                  contains(scheme.theta1(), VectorRef<double>(t1), 1e-9);
  j["gap"] = cert.gap;
  j["delta_raw"] = cert.delta_raw;
  j["delta_norm"] = cert.delta_norm;
  j["rho_star"] = exact.rho;
  j["epsilon_star"] = exact.epsilon_star;
  j["bounds"] = bounds_json(cert.gap, exact.rho, cert.delta_raw, cert.delta_norm);
  Json s;
  s["raw_lower"] = rep.raw_lower;
  s["raw_upper"] = rep.raw_upper;
  s["norm_lower"] = rep.norm_lower;
  s["norm_upper"] = rep.norm_upper ? Json(*rep.norm_upper) : Json(nullptr);
  s["raw_lower_violation"] = rep.raw_lower_violation;
  s["raw_upper_violation"] = rep.raw_upper_violation;
  s["norm_lower_violation"] = rep.norm_lower_violation;
  s["norm_upper_violation"] = rep.norm_upper_violation ? Json(*rep.norm_upper_violation) : Json(nullptr);
  s["all_hold"] = rep.all_hold();
  j["sandwich"] = std::move(s);
  emit(a.out, dump(j), out);
  return kExitOk;
}

struct SimulateArgs {
  std::string problem, out;
  std::int64_t samples = 200000;
  std::uint64_t seed = 0;
  std::int64_t chunk_size = 1 << 16;
  double tol = 1e-8;
  int max_iters = 100000;
};

Json estimate_json(const McEstimate& e) {
  return Json{{"estimate", e.estimate}, {"stderr", e.std_error}, {"errors", e.errors}};
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.samples < 1) throw ParseError("samples", "must be at least 1");
  if (a.chunk_size < 1) throw ParseError("chunk-size", "must be at least 1");
  const auto scheme = parse_gaussian_problem(read_json(a.problem));
  const auto sol = solve_closest_pair(scheme, solver_options(a.tol, a.max_iters));
  McOptions opts;
  opts.chunk_size = a.chunk_size;
  // Distinct streams for the two hypotheses.
  const auto e0 = mc_error(sol.detector, sol.theta0_star, scheme.sigma(), -1, a.samples, a.seed, opts);
  const auto e1 = mc_error(sol.detector, sol.theta1_star, scheme.sigma(), 1, a.samples,
                           instance_seed(a.seed, 1), opts);
  Json j;
  j["samples"] = a.samples;
  j["seed"] = a.seed;
  j["chunk_size"] = a.chunk_size;
  j["rho"] = sol.rho;
  j["epsilon_star"] = sol.epsilon_star;
  j["theta0_star"] = to_json(sol.theta0_star);
  j["theta1_star"] = to_json(sol.theta1_star);
  j["hypothesis0"] = estimate_json(e0);
  j["hypothesis1"] = estimate_json(e1);
  for (const auto& [name, e] : {std::pair{"hypothesis0", &e0}, std::pair{"hypothesis1", &e1}}) {
    const double z = e->std_error > 0.0 ? (e->estimate - sol.epsilon_star) / e->std_error : 0.0;
    j[name]["z"] = z;
    j[name]["within_3se"] = std::abs(e->estimate - sol.epsilon_star) <= 3.0 * e->std_error;
  }
  emit(a.out, dump(j), out);
  return kExitOk;
}

struct DiscreteArgs {
  std::string scheme, mode = "product", loss = "exp", out;
  double tol = 1e-7;
  int max_iters = 50000;
  std::uint64_t seed = 0;
};

int cmd_discrete(const DiscreteArgs& a, std::ostream& out, bool loss_given) {
  const auto scheme = parse_discrete_scheme(read_json(a.scheme));
  const auto loss = discrete::parse_loss(a.loss);
  discrete::SubgradientOptions sopts;
  sopts.tol = a.tol;
  sopts.max_iters = a.max_iters;

  if (a.mode == "surrogates") {
    std::vector<discrete::Loss> losses{discrete::Loss::hinge, discrete::Loss::exp,
                                       discrete::Loss::logistic};
    if (loss_given) losses = {loss};
    emit(a.out, discrete::surrogate_table_csv(discrete::compare_surrogates(scheme, losses, sopts)), out);
    return kExitOk;
  }

  Json j;
  j["mode"] = a.mode;
  if (a.mode == "product") {
    j["loss"] = discrete::to_string(loss);
    if (loss == discrete::Loss::exp) {
      const auto s = discrete::saddle_solve_product(scheme, sopts);
      j["detector"] = to_json(s.detector.values);
      j["decisions"] = decisions_json(s.detector);
      j["value"] = s.value;
      j["lower_bound"] = s.lower_bound;
      j["pair"] = Json{{"i0", s.i0}, {"i1", s.i1}};
      j["iterations"] = s.iterations;
      const double wce = discrete::worst_case_error(scheme, s.detector);
      j["worst_case_error"] = wce;
      j["exp_moment_bound"] = std::exp(s.value / 2.0);
    } else {
      const auto row = discrete::compare_surrogates(scheme, {loss}, sopts).front();
      if (!row.converged)
        throw NonConvergence(std::string(discrete::to_string(loss)) + " surrogate solve", row.gap);
      j["detector"] = to_json(row.detector.values);
      j["decisions"] = decisions_json(row.detector);
      j["value"] = row.value;
      j["worst_case_error"] = row.worst_case_error;
    }
  } else if (a.mode == "direct") {
    discrete::DirectOptions dopts;
    dopts.tol = a.tol;
    dopts.max_iters = a.max_iters;
    dopts.seed = a.seed;
    const auto d = discrete::direct_solve(scheme, dopts);
    j["detector"] = to_json(d.detector.values);
    j["decisions"] = decisions_json(d.detector);
    j["value"] = d.value;
    j["worst_case_error"] = discrete::worst_case_error(scheme, d.detector);
    j["exp_moment_bound"] = std::exp(d.value);
  } else if (a.mode == "reduction") {
    const auto closest = discrete::hellinger_closest_pair(scheme);
    const auto lrt = discrete::optimal_detector_for_pair(scheme.pmf(closest.i0), scheme.pmf(closest.i1));
    const auto s = discrete::saddle_solve_product(scheme, sopts);
    j["closest_pair"] = Json{{"i0", closest.i0}, {"i1", closest.i1}, {"affinity", closest.affinity}};
    j["lrt_detector"] = to_json(lrt.detector.values);
    j["capped_outcomes"] = lrt.capped;
    j["analytic_value"] = lrt.value;
    j["detector"] = to_json(s.detector.values);
    j["decisions"] = decisions_json(s.detector);
    j["value"] = s.value;
    j["solver_pair"] = Json{{"i0", s.i0}, {"i1", s.i1}};
    j["equivalence_residual"] = discrete::equivalence_residual(s.detector.values, lrt.detector.values);
    j["worst_case_error"] = discrete::worst_case_error(scheme, s.detector);
  } else {
    throw ParseError("mode", "unknown mode '" + a.mode + "'");
  }
  emit(a.out, dump(j), out);
  return kExitOk;
}

struct CampaignArgs {
  std::string kind, out;
  int n = 100;
  std::uint64_t seed = 0;
  int perturbations = 5;
  std::int64_t mc_samples = 20000;
  int max_dim = 20;
};

int cmd_campaign(const CampaignArgs& a, std::ostream& out) {
  Campaign c;
  c.kind = parse_campaign_kind(a.kind);
  c.n_instances = a.n;
  c.seed = a.seed;
  c.perturbations = a.perturbations;
  c.mc_samples = a.mc_samples;
  c.max_dim = a.max_dim;
  c.min_dim = std::min(c.min_dim, a.max_dim);
  const auto rows = run_campaign(c);
  const std::string csv = to_csv(c.kind, rows);
  const std::string summary = to_json(summarize(c, rows));
  if (a.out.empty()) {
    out << csv;
  } else {
    write_atomic(a.out, csv);
    write_atomic(a.out + ".summary.json", summary);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypothesis tests between convex sets of parameters"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "closest pair, optimal affine detector and error bounds");
  s->add_option("--problem", solve.problem, "Gaussian problem file")->required();
  s->add_option("--tol", solve.tol, "target normalized certificate")->capture_default_str();
  s->add_option("--max-iters", solve.max_iters)->capture_default_str();
  s->add_option("--out", solve.out, "report path (stdout if omitted)");

  CertifyArgs certify;
  auto* c = app.add_subcommand("certify", "certificate and sandwich checks for a candidate pair");
  c->add_option("--problem", certify.problem)->required();
  c->add_option("--pair", certify.pair, "pair file or solve report")->required();
  c->add_option("--reference-tol", certify.reference_tol, "tolerance of the reference solve")
      ->capture_default_str();
  c->add_option("--max-iters", certify.max_iters)->capture_default_str();
  c->add_option("--out", certify.out);

  SimulateArgs simulate;
  auto* m = app.add_subcommand("simulate", "Monte Carlo error of the optimal test at the closest pair");
  m->add_option("--problem", simulate.problem)->required();
  m->add_option("--samples", simulate.samples, "samples per hypothesis")->capture_default_str();
  m->add_option("--seed", simulate.seed)->capture_default_str();
  m->add_option("--chunk-size", simulate.chunk_size, "samples per random substream")
      ->capture_default_str();
  m->add_option("--tol", simulate.tol)->capture_default_str();
  m->add_option("--max-iters", simulate.max_iters)->capture_default_str();
  m->add_option("--out", simulate.out);

  DiscreteArgs disc;
  auto* d = app.add_subcommand("discrete", "detectors for finite observation schemes");
  d->add_option("--scheme", disc.scheme)->required();
  d->add_option("--mode", disc.mode)
      ->check(CLI::IsMember({"product", "direct", "reduction", "surrogates"}))
      ->capture_default_str();
  auto* loss_opt = d->add_option("--loss", disc.loss)
                       ->check(CLI::IsMember({"exp", "hinge", "logistic"}))
                       ->capture_default_str();
  d->add_option("--tol", disc.tol)->capture_default_str();
  d->add_option("--max-iters", disc.max_iters)->capture_default_str();
  d->add_option("--seed", disc.seed, "seed for direct-mode restarts")->capture_default_str();
  d->add_option("--out", disc.out);

  CampaignArgs camp;
  auto* g = app.add_subcommand("campaign", "randomized evidence campaign");
  g->add_option("--kind", camp.kind, "gaussian_bounds|sandwich|reduction_equiv|surrogate_table")
      ->required();
  g->add_option("--n", camp.n, "instances")->capture_default_str();
  g->add_option("--seed", camp.seed)->capture_default_str();
  g->add_option("--perturbations", camp.perturbations, "sandwich perturbations per instance")
      ->capture_default_str();
  g->add_option("--mc-samples", camp.mc_samples, "Monte Carlo samples per hypothesis")
      ->capture_default_str();
  g->add_option("--max-dim", camp.max_dim)->capture_default_str();
  g->add_option("--out", camp.out, "CSV path; the summary goes to <out>.summary.json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (*s) return cmd_solve(solve, out);
    if (*c) return cmd_certify(certify, out);
    if (*m) return cmd_simulate(simulate, out);
    if (*d) return cmd_discrete(disc, out, loss_opt->count() > 0);
    if (*g) return cmd_campaign(camp, out);
  } catch (const OverlappingHypotheses& e) {
    err << "overlapping hypotheses: " << e.what() << "\n";
    return kExitOverlap;
  } catch (const DegeneratePair& e) {
    err << "degenerate pair: " << e.what() << "\n";
    return kExitOverlap;
  } catch (const NonConvergence& e) {
    err << "no convergence: " << e.what() << "\n";
    return kExitNoConverge;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace convextest
