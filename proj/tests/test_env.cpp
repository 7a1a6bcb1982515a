#include <gtest/gtest.h>

#include <sibandit/env.hpp>

using namespace sibandit;

namespace {

EnvironmentSpec benchmark_env(std::uint64_t seed = 7, double beta = 1.5)
{
  return generate_environment(seed, 4, 3, beta);
}

} // namespace

TEST(SampleCovariate, UniformBoxSupport)
{
  CovariateSpec spec;
  spec.family = CovariateSpec::Family::uniform_box;
  spec.d = 1;
  spec.box_lo = 0.0;
  spec.box_hi = 1.0;
  RandomState rng(0);
  for (int i = 0; i < 100; ++i) {
    const Vector x = sample_covariate(spec, rng);
    ASSERT_GE(x(0), 0.0);
    ASSERT_LE(x(0), 1.0);
  }
}

TEST(SampleCovariate, TruncatedGaussianInsideUnitBall)
{
  CovariateSpec spec;
  spec.d = 4;
  RandomState rng(42);
  for (int i = 0; i < 500; ++i) {
    const Vector x = sample_covariate(spec, rng);
    ASSERT_LE(x.norm(), 1.0);
  }
}

TEST(SampleCovariate, TruncatedGaussianMeanNearZero)
{
  CovariateSpec spec;
  spec.d = 4;
  RandomState rng(1);
  Vector mean = Vector::Zero(4);
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += sample_covariate(spec, rng);
  mean /= static_cast<double>(n);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(mean(j), 0.0, 0.02);
}

TEST(SampleCovariate, RejectionBudgetSurfaces)
{
  CovariateSpec spec;
  spec.d = 400; // acceptance probability is essentially zero
  spec.rejection_cap = 50;
  RandomState rng(3);
  EXPECT_THROW(sample_covariate(spec, rng), std::runtime_error);
}

TEST(SampleCovariate, DeterministicStreams)
{
  CovariateSpec spec;
  spec.d = 4;
  RandomState a(9), b(9);
  for (int i = 0; i < 50; ++i) {
    const Vector xa = sample_covariate(spec, a);
    const Vector xb = sample_covariate(spec, b);
    ASSERT_EQ(xa, xb);
  }
}

TEST(TrueReward, PowerLinkValues)
{
  EnvironmentSpec env;
  env.d = 4;
  env.K = 1;
  Vector v = Vector::Zero(4);
  v(0) = 1.0;
  env.indices = {v};
  LinkSpec link;
  link.family = LinkSpec::Family::power_sgn;
  link.scale = 0.8;
  link.beta = 1.5;
  env.links = {link};
  env.covariate_law.d = 4;

  EXPECT_DOUBLE_EQ(true_reward(env, 0, Vector::Zero(4)), 0.0);
  Vector x = Vector::Zero(4);
  x(0) = 2.0;
  EXPECT_DOUBLE_EQ(true_reward(env, 0, x), 0.8);
  x(0) = -2.0;
  EXPECT_DOUBLE_EQ(true_reward(env, 0, x), -0.8);
}

TEST(TrueReward, PowerPlusLinearHandValue)
{
  LinkSpec link;
  link.family = LinkSpec::Family::power_sgn_plus_linear;
  link.scale = 0.5;
  link.beta = 1.5;
  link.linear_coef = 0.1;
  EXPECT_DOUBLE_EQ(link(2.0), 0.7);
}

TEST(TrueReward, MonotoneOnGridForIncreasingLinks)
{
  for (double beta : {0.7, 1.5, 2.5}) {
    LinkSpec link = generator_link(GenLinkFamily::mixed, 1, beta);
    double prev = -std::numeric_limits<double>::infinity();
    for (double z = -2.0; z <= 2.0; z += 0.01) {
      const double f = link(z);
      ASSERT_GE(f, prev - 1e-15) << "beta=" << beta << " z=" << z;
      prev = f;
    }
  }
}

TEST(DrawReward, ZeroVarianceIsExact)
{
  EnvironmentSpec env = benchmark_env();
  env.noise.variance = 0.0;
  RandomState rng(5);
  Vector x = Vector::Zero(4);
  x(0) = 0.5;
  EXPECT_DOUBLE_EQ(draw_reward(env, 1, x, rng), true_reward(env, 1, x));
}

TEST(DrawReward, GaussianMeanMatchesTrueReward)
{
  EnvironmentSpec env = benchmark_env();
  RandomState rng(11);
  Vector x = Vector::Zero(4);
  x(0) = 0.7;
  const double g = true_reward(env, 0, x);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += draw_reward(env, 0, x, rng);
  EXPECT_NEAR(sum / n, g, 0.01);
}

TEST(DrawReward, BernoulliClampsMean)
{
  EnvironmentSpec env;
  env.d = 2;
  env.K = 1;
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  env.indices = {v};
  LinkSpec link;
  link.family = LinkSpec::Family::power_sgn;
  link.beta = 1.0;
  link.scale = 1.2; // true reward 1.2 at z = 2
  env.links = {link};
  env.noise.family = NoiseSpec::Family::bernoulli;
  env.covariate_law.d = 2;

  Vector x = Vector::Zero(2);
  x(0) = 2.0;
  ASSERT_GT(true_reward(env, 0, x), 1.0);
  RandomState rng(2);
  double sum = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double r = draw_reward(env, 0, x, rng);
    ASSERT_TRUE(r == 0.0 || r == 1.0);
    sum += r;
  }
  EXPECT_DOUBLE_EQ(sum, 200.0); // mean clamped to 1
}

TEST(OracleGap, DirectMaxAndRunnerUp)
{
  EnvironmentSpec env;
  env.d = 2;
  env.K = 2;
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  env.indices = {v, v};
  LinkSpec l1, l2;
  l1.family = LinkSpec::Family::custom_table;
  l1.table_z = {-1.0, 1.0};
  l1.table_f = {0.3, 0.3};
  l2 = l1;
  l2.table_f = {0.7, 0.7};
  env.links = {l1, l2};
  env.covariate_law.d = 2;

  const OracleGap gap = oracle_gap(env, Vector::Zero(2));
  EXPECT_EQ(gap.best, 1);
  EXPECT_DOUBLE_EQ(gap.g1, 0.7);
  EXPECT_DOUBLE_EQ(gap.g2, 0.3);
}

TEST(OracleGap, TieBranchAndLowestIndexWinner)
{
  EnvironmentSpec env;
  env.d = 2;
  env.K = 3;
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  env.indices = {v, v, v};
  LinkSpec flat;
  flat.family = LinkSpec::Family::custom_table;
  flat.table_z = {-1.0, 1.0};
  flat.table_f = {0.4, 0.4};
  env.links = {flat, flat, flat};
  env.covariate_law.d = 2;

  const OracleGap gap = oracle_gap(env, Vector::Zero(2));
  EXPECT_EQ(gap.best, 0);
  EXPECT_DOUBLE_EQ(gap.g1, 0.4);
  EXPECT_DOUBLE_EQ(gap.g2, gap.g1);
}

TEST(OracleGap, MatchesExhaustiveEvaluationOnBenchmark)
{
  const EnvironmentSpec env = benchmark_env();
  Vector x = Vector::Zero(4);
  x(0) = 1.0;
  const OracleGap gap = oracle_gap(env, x);
  double best = -1e18, second = -1e18;
  int best_k = -1;
  for (int k = 0; k < env.K; ++k) {
    const double g = env.links[static_cast<std::size_t>(k)](env.indices[static_cast<std::size_t>(k)].dot(x));
    if (g > best) {
      best = g;
      best_k = k;
    }
  }
  for (int k = 0; k < env.K; ++k) {
    const double g = env.links[static_cast<std::size_t>(k)](env.indices[static_cast<std::size_t>(k)].dot(x));
    if (g < best) second = std::max(second, g);
  }
  EXPECT_EQ(gap.best, best_k);
  EXPECT_DOUBLE_EQ(gap.g1, best);
  EXPECT_DOUBLE_EQ(gap.g2, second);
}

TEST(OracleGap, ArgmaxInvariantUnderCommonShift)
{
  EnvironmentSpec env = benchmark_env();
  RandomState rng(13);
  EnvironmentSpec shifted = env;
  // replace each link with a tabulated version offset by a constant
  const double shift = 0.37;
  for (int k = 0; k < env.K; ++k) {
    LinkSpec table;
    table.family = LinkSpec::Family::custom_table;
    for (double z = -2.5; z <= 2.5 + 1e-9; z += 0.005) {
      table.table_z.push_back(z);
      table.table_f.push_back(env.links[static_cast<std::size_t>(k)](z) + shift);
    }
    shifted.links[static_cast<std::size_t>(k)] = table;
  }
  for (int i = 0; i < 200; ++i) {
    const Vector x = sample_covariate(env.covariate_law, rng);
    EXPECT_EQ(oracle_gap(env, x).best, oracle_gap(shifted, x).best);
  }
}

TEST(GenerateEnvironment, InvariantsHold)
{
  const EnvironmentSpec env = benchmark_env(123);
  EXPECT_EQ(env.d, 4);
  EXPECT_EQ(env.K, 3);
  for (const Vector& v : env.indices) {
    EXPECT_DOUBLE_EQ(v(0), 1.0);
    EXPECT_LE(v.norm(), 2.0 + 1e-12);
  }
  Matrix stacked(env.K, env.d);
  for (int k = 0; k < env.K; ++k) stacked.row(k) = env.indices[static_cast<std::size_t>(k)];
  EXPECT_EQ(stacked.colPivHouseholderQr().rank(), 3);
}

TEST(GenerateEnvironment, DeterministicInSeed)
{
  const EnvironmentSpec a = benchmark_env(55);
  const EnvironmentSpec b = benchmark_env(55);
  for (int k = 0; k < a.K; ++k) EXPECT_EQ(a.indices[static_cast<std::size_t>(k)], b.indices[static_cast<std::size_t>(k)]);
}

TEST(GenerateEnvironment, BenchmarkTrioLinks)
{
  const EnvironmentSpec env = benchmark_env(9, 1.5);
  EXPECT_EQ(env.links[0].family, LinkSpec::Family::power_sgn);
  EXPECT_DOUBLE_EQ(env.links[0].scale, 0.8);
  EXPECT_EQ(env.links[1].family, LinkSpec::Family::power_sgn_plus_linear);
  EXPECT_DOUBLE_EQ(env.links[1].scale, 0.5);
  EXPECT_DOUBLE_EQ(env.links[1].linear_coef, 0.1);
  EXPECT_EQ(env.links[2].family, LinkSpec::Family::power_sgn);
  EXPECT_DOUBLE_EQ(env.links[2].scale, 1.5);
}
