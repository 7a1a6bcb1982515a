#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace sibandit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

//! One-dimensional link function f_k. The two analytic families are odd
//! power curves; custom_table is a piecewise-linear interpolant of a
//! user-supplied grid for non-analytic monotone links.
struct LinkSpec {
  enum class Family { power_sgn, power_sgn_plus_linear, custom_table };

  Family family = Family::power_sgn;
  double beta = 1.0;        //!< smoothness / exponent (analytic families)
  double scale = 1.0;
  double linear_coef = 0.0; //!< used only by power_sgn_plus_linear
  std::vector<double> table_z; //!< custom_table knots, strictly increasing
  std::vector<double> table_f;

  double operator()(double z) const
  {
    switch (family) {
      case Family::power_sgn:
        return scale * sgn(z) * std::pow(std::abs(z) / 2.0, beta);
      case Family::power_sgn_plus_linear:
        return scale * sgn(z) * std::pow(std::abs(z) / 2.0, beta) +
               linear_coef * z;
      case Family::custom_table:
        return interp(z);
    }
    return 0.0;
  }

private:
  static double sgn(double z) { return (z > 0.0) - (z < 0.0); }

  double interp(double z) const
  {
    if (table_z.size() < 2 || table_z.size() != table_f.size())
      throw std::invalid_argument("custom_table link needs >= 2 knots");
    if (z <= table_z.front()) return table_f.front();
    if (z >= table_z.back()) return table_f.back();
    const auto it = std::upper_bound(table_z.begin(), table_z.end(), z);
    const std::size_t i = static_cast<std::size_t>(it - table_z.begin());
    const double t = (z - table_z[i - 1]) / (table_z[i] - table_z[i - 1]);
    return table_f[i - 1] + t * (table_f[i] - table_f[i - 1]);
  }
};

//! Additive reward noise. Gaussian noise is zero-mean; Bernoulli responses
//! are 0/1 with success probability clamped into [0, 1].
struct NoiseSpec {
  enum class Family { gaussian, bernoulli };
  Family family = Family::gaussian;
  double variance = 0.0; //!< gaussian only
};

//! Covariate law with compact support.
struct CovariateSpec {
  enum class Family { truncated_gaussian_unit_ball, uniform_box };
  Family family = Family::truncated_gaussian_unit_ball;
  int d = 1;
  double box_lo = 0.0; //!< uniform_box only
  double box_hi = 1.0;
  std::uint64_t rejection_cap = 1000000; //!< truncated-gaussian budget
};

//! One (covariate, reward) observation; arm and time step are optional tags.
struct LabeledSample {
  Vector x;
  double y = 0.0;
  std::optional<int> arm;
  std::optional<std::int64_t> t;
};

//! Ground-truth bandit instance: K single-index arms over R^d.
struct EnvironmentSpec {
  int d = 0;
  int K = 0;
  std::vector<Vector> indices; //!< v_k, first coordinate 1, ||v_k||_2 <= 2
  std::vector<LinkSpec> links;
  NoiseSpec noise;
  CovariateSpec covariate_law;

  void validate() const
  {
    if (d < 1 || K < 1) throw std::invalid_argument("environment: d, K >= 1");
    if (static_cast<int>(indices.size()) != K ||
        static_cast<int>(links.size()) != K)
      throw std::invalid_argument("environment: need K indices and K links");
    for (const Vector& v : indices) {
      if (v.size() != d)
        throw std::invalid_argument("environment: index dimension mismatch");
      if (std::abs(v(0) - 1.0) > 0.0)
        throw std::invalid_argument("environment: index v_1 must equal 1");
      if (v.norm() > 2.0 + 1e-12)
        throw std::invalid_argument("environment: index norm exceeds 2");
    }
    if (covariate_law.d != d)
      throw std::invalid_argument("environment: covariate dimension mismatch");
  }
};

//! Draw one covariate from the declared law.
//! The truncated Gaussian rejects standard normal vectors until the l2 norm
//! is <= 1; exceeding the rejection budget signals a pathological spec.
inline Vector sample_covariate(const CovariateSpec& spec, RandomState& rng)
{
  Vector x(spec.d);
  switch (spec.family) {
    case CovariateSpec::Family::uniform_box:
      for (int i = 0; i < spec.d; ++i)
        x(i) = rng.uniform(spec.box_lo, spec.box_hi);
      return x;
    case CovariateSpec::Family::truncated_gaussian_unit_ball:
      for (std::uint64_t attempt = 0; attempt < spec.rejection_cap; ++attempt) {
        for (int i = 0; i < spec.d; ++i) x(i) = rng.normal();
        if (x.norm() <= 1.0) return x;
      }
      throw std::runtime_error("sample_covariate: rejection budget exceeded");
  }
  throw std::invalid_argument("sample_covariate: unknown family");
}

//! Exact interval {v'x : x in support} of the covariate law projected on v.
inline std::pair<double, double> projection_range(const CovariateSpec& spec,
                                                  const Vector& v)
{
  switch (spec.family) {
    case CovariateSpec::Family::truncated_gaussian_unit_ball:
      return {-v.norm(), v.norm()};
    case CovariateSpec::Family::uniform_box: {
      double lo = 0.0, hi = 0.0;
      for (int i = 0; i < v.size(); ++i) {
        const double a = v(i) * spec.box_lo;
        const double b = v(i) * spec.box_hi;
        lo += std::min(a, b);
        hi += std::max(a, b);
      }
      return {lo, hi};
    }
  }
  throw std::invalid_argument("projection_range: unknown family");
}

//! f_k(v_k' x), evaluated exactly from the link spec. Arms are 0-based.
inline double true_reward(const EnvironmentSpec& spec, int k, const Vector& x)
{
  if (k < 0 || k >= spec.K) throw std::invalid_argument("true_reward: bad arm");
  return spec.links[static_cast<std::size_t>(k)](spec.indices[static_cast<std::size_t>(k)].dot(x));
}

//! Noisy reward draw for arm k at covariate x.
inline double draw_reward(const EnvironmentSpec& spec, int k, const Vector& x,
                          RandomState& rng)
{
  const double g = true_reward(spec, k, x);
  switch (spec.noise.family) {
    case NoiseSpec::Family::gaussian:
      return g + rng.normal(0.0, std::sqrt(spec.noise.variance));
    case NoiseSpec::Family::bernoulli: {
      const double p = std::clamp(g, 0.0, 1.0);
      return rng.uniform01() < p ? 1.0 : 0.0;
    }
  }
  throw std::invalid_argument("draw_reward: unknown noise family");
}

//! Best arm and top-two reward values at x.
//! best is the argmax (ties broken by smallest arm index), g1 the maximum,
//! g2 the largest value strictly below g1, or g1 itself when all arms tie.
struct OracleGap {
  int best = 0;
  double g1 = 0.0;
  double g2 = 0.0;
};

inline OracleGap oracle_gap(const EnvironmentSpec& spec, const Vector& x)
{
  OracleGap out;
  out.g1 = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < spec.K; ++k) {
    const double g = true_reward(spec, k, x);
    if (g > out.g1) {
      out.g1 = g;
      out.best = k;
    }
  }
  out.g2 = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < spec.K; ++k) {
    const double g = true_reward(spec, k, x);
    if (g < out.g1 && g > out.g2) out.g2 = g;
  }
  if (!std::isfinite(out.g2)) out.g2 = out.g1; // all arms tied
  return out;
}

//! Families the environment generator can assign to arms. `mixed` cycles
//! through the benchmark trio (0.8 power, 0.5 power + 0.1 linear, 1.5 power).
enum class GenLinkFamily { power_sgn, power_sgn_plus_linear, mixed };

inline LinkSpec generator_link(GenLinkFamily family, int k, double beta)
{
  static constexpr double kScales[3] = {0.8, 0.5, 1.5};
  LinkSpec link;
  link.beta = beta;
  link.scale = kScales[k % 3];
  switch (family) {
    case GenLinkFamily::power_sgn:
      link.family = LinkSpec::Family::power_sgn;
      break;
    case GenLinkFamily::power_sgn_plus_linear:
      link.family = LinkSpec::Family::power_sgn_plus_linear;
      link.linear_coef = 0.1;
      break;
    case GenLinkFamily::mixed:
      if (k % 3 == 1) {
        link.family = LinkSpec::Family::power_sgn_plus_linear;
        link.linear_coef = 0.1;
      } else {
        link.family = LinkSpec::Family::power_sgn;
      }
      break;
  }
  return link;
}

//! Randomly generate a bandit instance: index vectors with v_1 = 1 and
//! ||v||_2 <= 2, resampled until the stacked index matrix has full rank
//! (pairwise non-collinearity when K > d); links assigned per family;
//! truncated-Gaussian covariates and gaussian noise of variance 0.1.
inline EnvironmentSpec generate_environment(std::uint64_t seed, int d, int K,
                                            double beta,
                                            GenLinkFamily family =
                                              GenLinkFamily::mixed)
{
  if (d < 2 || K < 2)
    throw std::invalid_argument("generate_environment: d >= 2, K >= 2");
  RandomState rng(seed, /*stream=*/0x9e17);
  EnvironmentSpec env;
  env.d = d;
  env.K = K;
  env.covariate_law.family = CovariateSpec::Family::truncated_gaussian_unit_ball;
  env.covariate_law.d = d;
  env.noise.family = NoiseSpec::Family::gaussian;
  env.noise.variance = 0.1;

  const double free_cap = std::sqrt(3.0); // ||v|| <= 2 with v_1 = 1
  const int budget = 1000;
  for (int attempt = 0; attempt < budget; ++attempt) {
    env.indices.clear();
    for (int k = 0; k < K; ++k) {
      Vector v(d);
      v(0) = 1.0;
      double norm2 = 0.0;
      for (int i = 1; i < d; ++i) {
        v(i) = 0.5 * rng.normal();
        norm2 += v(i) * v(i);
      }
      if (norm2 > free_cap * free_cap) {
        const double s = free_cap / std::sqrt(norm2);
        for (int i = 1; i < d; ++i) v(i) *= s;
      }
      env.indices.push_back(std::move(v));
    }
    Matrix stacked(K, d);
    for (int k = 0; k < K; ++k) stacked.row(k) = env.indices[static_cast<std::size_t>(k)];
    bool ok;
    if (K <= d) {
      ok = stacked.colPivHouseholderQr().rank() == K;
    } else {
      ok = true;
      for (int a = 0; a < K && ok; ++a)
        for (int b = a + 1; b < K && ok; ++b) {
          Matrix pair(2, d);
          pair.row(0) = stacked.row(a);
          pair.row(1) = stacked.row(b);
          ok = pair.colPivHouseholderQr().rank() == 2;
        }
    }
    if (ok) break;
    if (attempt + 1 == budget)
      throw std::runtime_error("generate_environment: resampling budget exceeded");
  }

  for (int k = 0; k < K; ++k)
    env.links.push_back(generator_link(family, k, beta));
  env.validate();
  return env;
}

} // namespace sibandit
