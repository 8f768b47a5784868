#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "convextest/sim_harness.h"
#include "oracles.h"

using namespace convextest;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Campaign small(CampaignKind kind, int n, std::uint64_t seed) {
  Campaign c;
  c.kind = kind;
  c.n_instances = n;
  c.seed = seed;
  c.max_dim = 8;
  c.mc_samples = 5000;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

double quantity(const EvidenceRow& row, CampaignKind kind, const std::string& name) {
  const auto cols = campaign_columns(kind).quantities;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == name) return row.quantities[i];
  ADD_FAILURE() << "no column " << name;
  return 0;
}

const CampaignKind kAllKinds[] = {CampaignKind::gaussian_bounds, CampaignKind::sandwich,
                                  CampaignKind::reduction_equiv, CampaignKind::surrogate_table};

}  // namespace

TEST(Campaign, KindNames) {
  for (CampaignKind k : kAllKinds) EXPECT_EQ(parse_campaign_kind(to_string(k)), k);
  EXPECT_THROW(parse_campaign_kind("bogus"), InvalidArgument);
}

TEST(Campaign, InstanceSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(instance_seed(3, i));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(instance_seed(3, 0), instance_seed(4, 0));
  EXPECT_EQ(instance_seed(3, 7), instance_seed(3, 7));
}

TEST(Campaign, RerunsAreByteIdentical) {
  for (CampaignKind k : kAllKinds) {
    SCOPED_TRACE(to_string(k));
    Campaign c = small(k, 6, 17);
    c.threads = 1;
    const auto a = run_campaign(c);
    c.threads = 4;
    const auto b = run_campaign(c);
    EXPECT_EQ(to_csv(k, a), to_csv(k, b));
    EXPECT_EQ(to_json(summarize(c, a)), to_json(summarize(c, b)));
  }
}

TEST(Campaign, CsvLayout) {
  for (CampaignKind k : kAllKinds) {
    SCOPED_TRACE(to_string(k));
    const auto rows = run_campaign(small(k, 3, 5));
    const auto out = lines(to_csv(k, rows));
    ASSERT_EQ(out.size(), 4u);
    const auto cols = campaign_columns(k);
    const auto commas = [](const std::string& l) { return std::count(l.begin(), l.end(), ','); };
    EXPECT_EQ(out[0].rfind("instance,seed,status,description,", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(commas(out[0])), 4 + cols.quantities.size() + cols.flags.size());
    for (std::size_t i = 1; i < out.size(); ++i) EXPECT_EQ(commas(out[i]), commas(out[0])) << out[i];
  }
}

TEST(Campaign, GaussianBoundsRowsAreConsistent) {
  const Campaign c = small(CampaignKind::gaussian_bounds, 10, 23);
  const auto rows = run_campaign(c);
  for (const auto& r : rows) {
    ASSERT_EQ(r.status, "ok");
    EXPECT_TRUE(r.passed());
    const double rho = quantity(r, c.kind, "rho_star");
    EXPECT_NEAR(quantity(r, c.kind, "epsilon_star"), static_cast<double>(oracle::phi_upper(rho / 2)), 1e-14);
    EXPECT_LE(quantity(r, c.kind, "delta_norm"), c.tol_delta);
    EXPECT_LE(r.violation, 0.0);
  }
  const auto s = summarize(c, rows);
  EXPECT_EQ(s.passed, 10);
  EXPECT_EQ(s.pass_rate, 1.0);
}

TEST(Campaign, SandwichHoldsEverywhere) {
  Campaign c = small(CampaignKind::sandwich, 20, 29);
  c.max_dim = 20;
  const auto rows = run_campaign(c);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_TRUE(r.passed()) << to_csv(c.kind, {r});
  }
}

TEST(Campaign, ReductionRowsHaveSmallResidual) {
  const Campaign c = small(CampaignKind::reduction_equiv, 20, 31);
  for (const auto& r : run_campaign(c)) {
    EXPECT_TRUE(r.passed());
    EXPECT_LE(quantity(r, c.kind, "residual"), 1e-6);
  }
}

TEST(Campaign, SurrogateRowsSatisfyExpMomentBound) {
  const Campaign c = small(CampaignKind::surrogate_table, 10, 37);
  for (const auto& r : run_campaign(c)) {
    EXPECT_TRUE(r.passed());
    const double value = quantity(r, c.kind, "product_value");
    EXPECT_LE(quantity(r, c.kind, "wce_product"), std::exp(value / 2) + 1e-9);
    EXPECT_LE(quantity(r, c.kind, "direct_value"), quantity(r, c.kind, "direct_value_at_product") + 1e-7);
  }
}

TEST(Campaign, RowFailuresStayInTheirRow) {
  Campaign c = small(CampaignKind::gaussian_bounds, 4, 41);
  c.tol_delta = 0.0;  // rejected by the solver in every row
  std::vector<EvidenceRow> rows;
  ASSERT_NO_THROW(rows = run_campaign(c));
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_NE(r.status, "ok");
    EXPECT_EQ(r.status.find(','), std::string::npos);
    EXPECT_FALSE(r.passed());
  }
  const auto s = summarize(c, rows);
  EXPECT_EQ(s.passed, 0);
  EXPECT_NE(to_json(s).find("\"errors\""), std::string::npos);
}

TEST(Campaign, RejectsInvalidCampaigns) {
  Campaign c;
  c.n_instances = 0;
  EXPECT_THROW(run_campaign(c), InvalidArgument);
  c.n_instances = 1;
  c.min_dim = 5;
  c.max_dim = 4;
  EXPECT_THROW(run_campaign(c), InvalidArgument);
}

TEST(Generators, GaussianSchemesAreValidAndDisjoint) {
  for (int i = 0; i < 50; ++i) {
    std::mt19937_64 rng(instance_seed(43, i));
    const int d = 1 + i % 20;
    const auto s = random_gaussian_scheme(rng, d);
    EXPECT_EQ(s.dim(), d);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s.sigma());
    EXPECT_LE(eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff(), 1e3 * (1 + 1e-9));
    // A separating direction certifies disjointness.
    const auto sol = solve_closest_pair(s);
    EXPECT_GT(sol.rho, 1e-6);
  }
}

TEST(Generators, DiscreteSchemesAreValid) {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_discrete_scheme(rng, 2 + i % 7, 2 + i % 5, 0.1);
    EXPECT_FALSE(s.hypothesis0().empty());
    EXPECT_FALSE(s.hypothesis1().empty());
    for (int j = 0; j < s.size(); ++j) {
      EXPECT_NEAR(s.pmf(j).sum(), 1.0, 1e-12);
      EXPECT_GE(s.pmf(j).minCoeff(), 0.1 / s.outcomes() * (1 - 1e-12));
    }
  }
}

TEST(Generators, ReductionSchemesHaveStrictSaddle) {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 30; ++i) {
    int attempts = 0;
    const auto s = random_reduction_scheme(rng, 6, 6, &attempts);
    EXPECT_GE(attempts, 1);
    EXPECT_GT(s.pmfs().minCoeff(), 0.0);
    const auto cp = discrete::hellinger_closest_pair(s);
    const auto pair = discrete::optimal_detector_for_pair(s.pmf(cp.i0), s.pmf(cp.i1));
    for (int j = 0; j < s.size(); ++j) {
      if (j == cp.i0 || j == cp.i1) continue;
      const int partner = s.label(j) < 0 ? cp.i0 : cp.i1;
      EXPECT_LT(discrete::log_g_exp(s, pair.detector, j), discrete::log_g_exp(s, pair.detector, partner));
    }
  }
}

TEST(Summary, JsonFields) {
  const Campaign c = small(CampaignKind::reduction_equiv, 3, 59);
  const std::string j = to_json(summarize(c, run_campaign(c)));
  for (const char* key : {"\"campaign\"", "\"n_instances\"", "\"passed\"", "\"pass_rate\"", "\"worst_violation\""})
    EXPECT_NE(j.find(key), std::string::npos) << key;
}
