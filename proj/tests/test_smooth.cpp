#include <gtest/gtest.h>

#include <cmath>

#include <sibandit/env.hpp>
#include <sibandit/smooth.hpp>

using namespace sibandit;

namespace {

//! frozen spreadsheet values (outer logs base 2, inner log natural)
struct LevelCase {
  double n, beta_lo, beta_hi;
  int l1, l2, l3;
};

const std::vector<LevelCase> kLevelCases = {
  {12000, 0.9, 1.9, 1, 5, 6},  {12000, 1.9, 2.9, 1, 3, 4},
  {2000, 0.9, 1.9, 1, 5, 6},   {1000000, 0.5, 2.5, 1, 9, 13},
  {300, 0.9, 1.9, 1, 4, 5},    {50000, 1.9, 2.9, 1, 3, 4},
};

SmoothnessConfig fast_config(std::uint64_t seed)
{
  SmoothnessConfig cfg;
  cfg.beta_lo = 0.9;
  cfg.beta_hi = 1.9;
  cfg.seed = seed;
  cfg.mrc.max_generations = 60;
  cfg.mrc.restarts = 1;
  return cfg;
}

} // namespace

TEST(LepskiLevels, MatchesSpreadsheetOracle)
{
  for (const auto& c : kLevelCases) {
    const auto [l1, l2, l3] = lepski_levels(c.n, c.beta_lo, c.beta_hi);
    EXPECT_EQ(l1, c.l1) << "n=" << c.n;
    EXPECT_EQ(l2, c.l2) << "n=" << c.n;
    EXPECT_EQ(l3, c.l3) << "n=" << c.n;
  }
}

TEST(LepskiLevels, FirstLevelMonotoneInN)
{
  int prev = 0;
  for (double n : {1e2, 1e4, 1e6, 1e9, 1e12}) {
    const auto [l1, l2, l3] = lepski_levels(n, 0.9, 1.9);
    EXPECT_GE(l1, prev);
    EXPECT_LE(l1, l2);
    EXPECT_GE(l3, l1);
    prev = l1;
  }
}

TEST(ExplorationBudget, MatchesSpreadsheetOracle)
{
  // ceil(C_gap (d + ln^2 n) n^{2 blo (bhi+1)/(2 bhi+1)^2})
  EXPECT_EQ(exploration_budget(12000, 4, 0.9, 1.9, 0.01, 3), 8);
  EXPECT_EQ(exploration_budget(12000, 4, 0.9, 1.9, 1.0, 3), 775);
  EXPECT_EQ(exploration_budget(12000, 4, 0.9, 1.9, 0.5, 3), 388);
  EXPECT_EQ(exploration_budget(50000, 6, 0.9, 1.9, 0.5, 3), 715);
}

TEST(ExplorationBudget, CapBranchFlags)
{
  bool capped = false;
  const std::int64_t n0 = exploration_budget(1200, 4, 0.9, 1.9, 100.0, 3, &capped);
  EXPECT_TRUE(capped);
  EXPECT_EQ(n0, 1200 / 12);
  capped = true;
  exploration_budget(12000, 4, 0.9, 1.9, 0.01, 3, &capped);
  EXPECT_FALSE(capped);
}

TEST(ExplorationBudget, IncreasingInDimension)
{
  std::int64_t prev = 0;
  for (int d : {2, 4, 8, 16}) {
    const std::int64_t n0 = exploration_budget(100000, d, 0.9, 1.9, 0.2, 3);
    EXPECT_GE(n0, prev);
    prev = n0;
  }
}

TEST(BetaFromBmax, InvertsTheDefiningFormula)
{
  // b_max = 2^{-l1 beta} with C_l = 0 recovers beta exactly
  for (double beta : {0.9, 1.3, 1.7}) {
    for (int l1 : {1, 2, 5}) {
      const double b_max = std::pow(2.0, -l1 * beta);
      EXPECT_NEAR(beta_from_bmax(b_max, l1, 12000.0, 0.0), beta, 1e-12);
    }
  }
}

TEST(BetaFromBmax, ClampIsIdempotent)
{
  for (double raw : {-3.0, 0.9, 1.4, 1.9, 7.2}) {
    const double once = std::clamp(raw, 0.9, 1.9);
    EXPECT_DOUBLE_EQ(std::clamp(once, 0.9, 1.9), once);
  }
}

TEST(SmoothnessConfig, ValidatesLayout)
{
  SmoothnessConfig cfg;
  cfg.beta_lo = 1.2; // not < 1
  cfg.beta_hi = 1.9;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.beta_lo = 0.9;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_FALSE(cfg.theory_precondition_holds()); // 1.9 <= 2/0.1
  cfg.beta_lo = 0.5;
  cfg.beta_hi = 4.5;
  EXPECT_TRUE(cfg.theory_precondition_holds());
}

TEST(EstimateSmoothness, ClampAndRangeInvariant)
{
  const EnvironmentSpec env = generate_environment(21, 4, 3, 1.5);
  SmoothnessConfig cfg = fast_config(2);
  cfg.c_gap = 0.15;
  const SmoothnessEstimate est = estimate_smoothness(env, 12000, cfg);
  EXPECT_GE(est.beta_est, cfg.beta_lo);
  EXPECT_LE(est.beta_est, cfg.beta_hi);
  EXPECT_GT(est.b_max, 0.0);
  EXPECT_EQ(est.l1, 1);
  EXPECT_EQ(est.l2, 5);
  EXPECT_EQ(est.l3, 6);
  EXPECT_FALSE(est.bins.empty());
}

TEST(EstimateSmoothness, GridPointsInsideDisjointBins)
{
  const EnvironmentSpec env = generate_environment(22, 4, 3, 1.5);
  SmoothnessConfig cfg = fast_config(3);
  cfg.c_gap = 0.15;
  const SmoothnessEstimate est = estimate_smoothness(env, 12000, cfg);
  const double w1 = std::ldexp(1.0, -est.l1);
  std::map<std::pair<int, std::int64_t>, int> seen;
  for (const BinDiag& bin : est.bins) {
    EXPECT_NEAR(bin.hi - bin.lo, w1, 1e-12);
    EXPECT_DOUBLE_EQ(bin.lo, static_cast<double>(bin.bin) * w1); // lattice-aligned
    ++seen[{bin.arm, bin.bin}];
  }
  for (const auto& [key, count] : seen) EXPECT_EQ(count, 1); // no overlap per arm
}

TEST(EstimateSmoothness, ZeroDiscrepancyClampsHigh)
{
  // constant responses: coarse and fine fits agree exactly everywhere
  std::vector<std::vector<LabeledSample>> per_arm(1);
  RandomState rng(4);
  for (int i = 0; i < 400; ++i) {
    LabeledSample s;
    s.x = Vector::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    s.y = 0.25;
    per_arm[0].push_back(std::move(s));
  }
  const SmoothnessConfig cfg = fast_config(5);
  const SmoothnessEstimate est = estimate_smoothness_from(per_arm, 12000, cfg);
  EXPECT_TRUE(est.zero_discrepancy);
  EXPECT_DOUBLE_EQ(est.beta_est, cfg.beta_hi);
}

TEST(EstimateSmoothness, UndersmoothsOnBenchmark)
{
  // trimmed-down version of the acceptance property: most estimates land at
  // or below the true smoothness plus slack
  int below = 0;
  const int trials = 6;
  for (int trial = 0; trial < trials; ++trial) {
    const EnvironmentSpec env = generate_environment(100 + static_cast<std::uint64_t>(trial), 4, 3, 1.5);
    SmoothnessConfig cfg = fast_config(200 + static_cast<std::uint64_t>(trial));
    const SmoothnessEstimate est = estimate_smoothness(env, 12000, cfg);
    ASSERT_GE(est.beta_est, 0.9);
    ASSERT_LE(est.beta_est, 1.9);
    if (est.beta_est <= 1.6) ++below;
  }
  EXPECT_GE(below, trials / 2);
}

TEST(RunAdaptive, SingleArmExploresWithoutRegret)
{
  EnvironmentSpec env;
  env.d = 2;
  env.K = 1;
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  env.indices = {v};
  env.links = {generator_link(GenLinkFamily::power_sgn, 0, 1.5)};
  env.covariate_law.d = 2;
  env.noise.variance = 0.1;

  SmoothnessConfig cfg = fast_config(6);
  cfg.c_gap = 0.05;
  BanditConfig proto;
  proto.mrc.max_generations = 60;
  proto.mrc.restarts = 1;
  const RegretTrace trace = run_adaptive(env, 3000, cfg, proto);
  ASSERT_EQ(trace.rows.size(), 3000u);
  EXPECT_DOUBLE_EQ(trace.terminal_regret(), 0.0);
  ASSERT_TRUE(trace.smoothness.has_value());
}

TEST(RunAdaptive, ExplorationPrefixIsRoundRobinBlocks)
{
  const EnvironmentSpec env = generate_environment(23, 4, 3, 1.5);
  SmoothnessConfig cfg = fast_config(7);
  cfg.c_gap = 0.05;
  BanditConfig proto;
  proto.mrc.max_generations = 60;
  proto.mrc.restarts = 1;
  const RegretTrace trace = run_adaptive(env, 6000, cfg, proto);
  ASSERT_TRUE(trace.smoothness.has_value());
  const std::int64_t n0 = trace.smoothness->n0;
  ASSERT_GT(n0, 0);
  for (std::int64_t t = 0; t < 2 * 3 * n0; ++t) {
    const int expected_arm = static_cast<int>(t / (2 * n0));
    ASSERT_EQ(trace.rows[static_cast<std::size_t>(t)].arm, expected_arm) << "t=" << t;
    ASSERT_EQ(trace.rows[static_cast<std::size_t>(t)].t, t);
  }
  EXPECT_EQ(trace.rows.size(), 6000u);
}

TEST(RunAdaptive, DeterministicReplay)
{
  const EnvironmentSpec env = generate_environment(24, 4, 3, 1.5);
  SmoothnessConfig cfg = fast_config(8);
  cfg.c_gap = 0.05;
  BanditConfig proto;
  proto.mrc.max_generations = 60;
  proto.mrc.restarts = 1;
  const RegretTrace a = run_adaptive(env, 5000, cfg, proto);
  const RegretTrace b = run_adaptive(env, 5000, cfg, proto);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    ASSERT_EQ(a.rows[i].arm, b.rows[i].arm);
    ASSERT_EQ(a.rows[i].cum_regret, b.rows[i].cum_regret);
  }
  EXPECT_EQ(a.smoothness->beta_est, b.smoothness->beta_est);
}

TEST(RunAdaptive, HorizonTooShortRejected)
{
  const EnvironmentSpec env = generate_environment(25, 4, 3, 1.5);
  SmoothnessConfig cfg = fast_config(9);
  cfg.c_gap = 100.0; // capped to horizon/(4K): exploration takes half the horizon
  BanditConfig proto;
  EXPECT_THROW(run_adaptive(env, 10, cfg, proto), std::invalid_argument);
}
