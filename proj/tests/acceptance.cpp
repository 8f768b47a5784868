// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "convextest/bounds.h"
#include "convextest/cli.h"
#include "convextest/discrete.h"
#include "convextest/gaussian.h"
#include "convextest/monte_carlo.h"
#include "convextest/sim_harness.h"
#include "oracles.h"

using namespace convextest;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    v.pass = false;
    v.detail += " (over the " + std::to_string(budget_s) + " s budget)";
  }
  failures += !v.pass;
  std::printf("%s %d %s [%.2f s] %s\n", v.pass ? "PASS" : "FAIL", id, name, secs, v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }

GaussianScheme<double> box_1d() {
  return {MatrixXd::Identity(1, 1), ConvexSet<double>::box(scalar(-2), scalar(-1)),
          ConvexSet<double>::box(scalar(1), scalar(3))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double column(const EvidenceRow& r, CampaignKind kind, const std::string& name) {
  const auto cols = campaign_columns(kind).quantities;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == name) return r.quantities[i];
  throw std::runtime_error("no column " + name);
}

}  // namespace

int main() {
  criterion(1, "exact error of the 1D box example", 5.0, [] {
    const auto sol = solve_closest_pair(box_1d());
    const double exact = static_cast<double>(oracle::phi_upper(1.0L));
    bool ok = std::abs(sol.rho - 2.0) <= 1e-6 && std::abs(sol.epsilon_star - exact) <= 1e-7 &&
              std::abs(sol.epsilon_star - 0.1586553) <= 1e-7;
    const auto h0 = mc_error(sol.detector, sol.theta0_star, MatrixXd::Identity(1, 1), -1, 200000, 42);
    const auto h1 = mc_error(sol.detector, sol.theta1_star, MatrixXd::Identity(1, 1), 1, 200000, 43);
    const double z0 = (h0.estimate - exact) / h0.std_error, z1 = (h1.estimate - exact) / h1.std_error;
    ok = ok && std::abs(z0) <= 3 && std::abs(z1) <= 3;
    return Verdict{ok, fmt("rho=%.12g eps*=%.10g", sol.rho, sol.epsilon_star) + fmt(" mc z=%.3f,%.3f", z0, z1)};
  });

  criterion(2, "certificate soundness", 60.0, [] {
    double worst = 0;
    int solved = 0;
    for (int i = 0; i < 200; ++i) {
      std::mt19937_64 rng(instance_seed(2024, i));
      const auto s = random_gaussian_scheme(rng, 1 + i % 20);
      const auto sol = solve_closest_pair(s);
      worst = std::max(worst, sol.certificate.delta_norm);
      ++solved;
    }
    const auto c = certificate(box_1d(), VectorRef<double>(scalar(-1.5)), VectorRef<double>(scalar(1.0)));
    const bool ok = solved == 200 && worst <= 1e-6 && std::abs(c.delta_raw - 1.25) <= 1e-9;
    return Verdict{ok, fmt("max delta_norm=%.3g over %g instances, perturbed delta_raw=%.15g", worst, solved, c.delta_raw)};
  });

  criterion(3, "sandwich inequalities under perturbation", 120.0, [] {
    Campaign c;
    c.kind = CampaignKind::sandwich;
    c.n_instances = 200;
    c.perturbations = 5;
    c.seed = 3;
    const auto rows = run_campaign(c);
    double checks = 0, upper = 0;
    int failed = 0;
    double worst = 0;
    for (const auto& r : rows) {
      failed += !r.passed();
      worst = std::max(worst, r.violation);
      if (r.status == "ok") {
        checks += column(r, c.kind, "checks");
        upper += column(r, c.kind, "norm_upper_evaluated");
      }
    }
    const bool ok = failed == 0 && checks >= 1000;
    return Verdict{ok, fmt("%g perturbations, %g with the normalized upper side, ", checks, upper) +
                           fmt("%g failing rows, worst violation %.3g", failed, worst)};
  });

  criterion(4, "bound consistency and monotonicity", 0, [] {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    double worst_zero = 0;
    int breaks = 0;
    for (int i = 0; i < 20; ++i) {
      const double rho = u(rng);
      const double e = epsilon_star(rho);
      worst_zero = std::max({worst_zero, std::abs(bound_gjn(rho, 0).value - e),
                             std::abs(bound_exact_reference(rho, 0).value - e),
                             std::abs(bound_normalized_reference(rho, 0).value - e)});
      double g = -1, x = -1, n = -1;
      for (int k = 0; k < 50; ++k) {
        const double frac = k / 49.0;
        const double gv = bound_gjn(rho, frac * rho * rho).value;
        const double xv = bound_exact_reference(rho, 0.999 * frac * rho * rho).value;
        const double nv = bound_normalized_reference(rho, frac).value;
        breaks += (gv < g) + (xv < x) + (nv < n);
        g = gv, x = xv, n = nv;
      }
    }
    return Verdict{worst_zero <= 1e-12 && breaks == 0,
                   fmt("max |bound - eps*| at delta=0: %.3g, monotonicity breaks: %g", worst_zero, breaks)};
  });

  criterion(5, "analytic pair minimum", 0, [] {
    std::mt19937_64 rng(5);
    double worst = 0, worst_grad = 0;
    discrete::SubgradientOptions opts;
    opts.tol = 1e-10;
    for (int i = 0; i < 200; ++i) {
      const int k = 2 + i % 7;
      const VectorXd p0 = oracle::random_pmf(rng, k, 0.05), p1 = oracle::random_pmf(rng, k, 0.05);
      MatrixXd m(k, 2);
      m << p0, p1;
      const discrete::DiscreteScheme s(m, {-1, 1});
      const auto sol = discrete::saddle_solve_product(s, opts);
      worst = std::max(worst, std::abs(sol.value - 2 * std::log(discrete::hellinger_affinity(p0, p1))));
      const VectorXd h = 2 * oracle::normal_vector(rng, k);
      const auto obj = discrete::pair_objective(s, {h}, 0, 1);
      for (int x = 0; x < k; ++x) {
        VectorXd up = h, down = h;
        up(x) += 1e-5;
        down(x) -= 1e-5;
        const double fd = (discrete::pair_objective(s, {up}, 0, 1).value - discrete::pair_objective(s, {down}, 0, 1).value) / 2e-5;
        worst_grad = std::max(worst_grad, std::abs(obj.gradient(x) - fd) / std::max(1.0, std::abs(fd)));
      }
    }
    return Verdict{worst <= 1e-8 && worst_grad <= 1e-6,
                   fmt("max |min - 2 log affinity|=%.3g, max gradient rel. error=%.3g", worst, worst_grad)};
  });

  criterion(6, "reduction equivalence", 0, [] {
    Campaign c;
    c.kind = CampaignKind::reduction_equiv;
    c.n_instances = 100;
    c.seed = 6;
    const auto rows = run_campaign(c);
    double worst = 0;
    int failed = 0;
    for (const auto& r : rows) {
      failed += !r.passed();
      if (r.status == "ok") worst = std::max(worst, column(r, c.kind, "residual"));
    }
    return Verdict{failed == 0 && worst <= 1e-6, fmt("max residual=%.3g, failing rows=%g", worst, failed)};
  });

  criterion(7, "sandwich of suprema", 0, [] {
    std::mt19937_64 rng(7);
    int right_fail = 0, left_fail = 0, in_regime = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      const auto s = random_discrete_scheme(rng, 2 + i % 7, 2 + i % 5);
      const VectorXd h = 1.5 * oracle::normal_vector(rng, s.outcomes());
      const auto r = discrete::sandwich_product_check(s, {h});
      right_fail += !r.right_holds;
      if (r.left_holds) {
        ++in_regime;
        left_fail += !*r.left_holds;
      }
    }
    return Verdict{right_fail == 0 && left_fail == 0,
                   fmt("right failures %g, left failures %g on %g in-regime draws, ", right_fail, left_fail, in_regime) +
                       fmt("out-of-regime fraction %.4f", 1.0 - static_cast<double>(in_regime) / draws)};
  });

  criterion(8, "worst-case 0-1 error of the two-outcome test", 0, [] {
    MatrixXd m(2, 2);
    m << 0.8, 0.2, 0.2, 0.8;
    const discrete::DiscreteScheme s(m, {-1, 1});
    const auto lrt = discrete::optimal_detector_for_pair(s.pmf(0), s.pmf(1));
    const double wce = discrete::worst_case_error(s, lrt.detector);
    const auto sol = discrete::saddle_solve_product(s);
    const double bound = std::exp(sol.value / 2);
    return Verdict{wce == 0.2 && bound >= 0.2, fmt("wce=%.17g exp(value/2)=%.12g", wce, bound)};
  });

  criterion(9, "deterministic simulate and campaign", 0, [] {
    const fs::path dir = fs::temp_directory_path() / "convextest_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string problem = std::string(FIXTURE_DIR) + "/box_1d.json";
    std::ostringstream sink;
    auto run = [&](std::vector<std::string> args) { return run_cli(args, sink, sink); };
    bool ok = true;
    for (const char* name : {"a.json", "b.json"})
      ok = ok && run({"simulate", "--problem", problem, "--samples", "200000", "--seed", "42", "--out",
                      (dir / name).string()}) == 0;
    const bool sim_same = ok && slurp(dir / "a.json") == slurp(dir / "b.json");
    bool camp_same = true;
    for (const char* kind : {"gaussian_bounds", "sandwich", "reduction_equiv", "surrogate_table"}) {
      for (const char* name : {"a.csv", "b.csv"})
        ok = ok && run({"campaign", "--kind", kind, "--n", "10", "--seed", "9", "--out", (dir / name).string()}) == 0;
      camp_same = camp_same && slurp(dir / "a.csv") == slurp(dir / "b.csv") &&
                  slurp(dir / "a.csv.summary.json") == slurp(dir / "b.csv.summary.json");
    }
    fs::remove_all(dir);
    return Verdict{ok && sim_same && camp_same,
                   std::string("simulate ") + (sim_same ? "identical" : "differs") + ", campaigns " +
                       (camp_same ? "identical" : "differ")};
  });

  return failures == 0 ? 0 : 1;
}
