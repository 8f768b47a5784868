#ifndef CONVEXTEST_SIM_HARNESS_H
#define CONVEXTEST_SIM_HARNESS_H

// Randomized campaigns that tie the analytic results to measured ones.
//
// Every instance draws from its own generator, seeded from (campaign seed,
// instance id), so a campaign's rows do not depend on scheduling and a rerun
// with the same seed reproduces the same bytes.
//
// CSV layout: instance,seed,status,description, then the kind's quantity
// columns, then its flag columns, then violation. `campaign_columns` lists
// the quantity and flag names for each kind. Flags print as true/false, or
// empty when the check was not applicable to the instance. `violation` is
// the largest amount by which a checked inequality failed (<= 0 when all
// held).

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "convextest/discrete.h"
#include "convextest/gaussian.h"

namespace convextest {

enum class CampaignKind { gaussian_bounds, sandwich, reduction_equiv, surrogate_table };

const char* to_string(CampaignKind kind);
/// Throws InvalidArgument("kind", ...) for unknown names.
CampaignKind parse_campaign_kind(const std::string& name);

struct Campaign {
  CampaignKind kind = CampaignKind::gaussian_bounds;
  int n_instances = 1;
  std::uint64_t seed = 0;
  int min_dim = 2;
  int max_dim = 20;
  int min_outcomes = 2;
  int max_outcomes = 8;
  int max_params = 6;
  double tol_delta = 1e-8;
  double exact_tol_delta = 1e-11;  // reference solve for sandwich perturbations
  std::int64_t mc_samples = 20000;
  int perturbations = 5;  // sandwich perturbations per instance
  double product_tol = 1e-10;
  unsigned threads = 0;
};

struct CampaignColumns {
  std::vector<std::string> quantities;
  std::vector<std::string> flags;
};

CampaignColumns campaign_columns(CampaignKind kind);

struct EvidenceRow {
  int instance = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string description;
  std::vector<double> quantities;            // aligned with campaign_columns().quantities
  std::vector<std::optional<bool>> flags;    // aligned with campaign_columns().flags
  double violation = 0.0;

  bool passed() const;
};

struct CampaignSummary {
  std::string campaign;
  int n_instances = 0;
  int passed = 0;
  double pass_rate = 0.0;
  double worst_violation = 0.0;
  std::vector<std::pair<std::string, double>> extras;
};

std::vector<EvidenceRow> run_campaign(const Campaign& campaign);
CampaignSummary summarize(const Campaign& campaign, const std::vector<EvidenceRow>& rows);

std::string to_csv(CampaignKind kind, const std::vector<EvidenceRow>& rows);
/// {"campaign", "n_instances", "passed", "pass_rate", "worst_violation", ...extras}
std::string to_json(const CampaignSummary& summary);

// Instance generators, exposed for tests.

std::uint64_t instance_seed(std::uint64_t campaign_seed, int instance);

/// Random PD covariance with condition number <= 1e3 and two disjoint random
/// sets (box, ball, ellipsoid or polytope) around well-separated centers.
GaussianScheme<double> random_gaussian_scheme(std::mt19937_64& rng, int dim);

/// Dirichlet(1) pmfs, mixed with `floor` of the uniform pmf; both labels present.
discrete::DiscreteScheme random_discrete_scheme(std::mt19937_64& rng, int outcomes, int params,
                                                double floor = 0.0);

/// Strictly positive scheme whose Hellinger-closest grid pair is a strict
/// saddle point of the product problem: under that pair's likelihood-ratio
/// detector every other grid point has a strictly smaller log-moment.
/// `attempts` receives the number of draws used.
discrete::DiscreteScheme random_reduction_scheme(std::mt19937_64& rng, int max_outcomes,
                                                 int max_params, int* attempts = nullptr);

}  // namespace convextest

#endif  // CONVEXTEST_SIM_HARNESS_H
