#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bandit.hpp"
#include "env.hpp"
#include "lpe.hpp"
#include "mrc.hpp"
#include "trace.hpp"

namespace sibandit {

//! Configuration for link-smoothness estimation and the adaptive wrapper.
//! Requires beta_lo < 1 < beta_hi. Log conventions: outer logs base 2,
//! the inner log in log2 log n natural, consistently across the levels and
//! the beta_est penalty.
struct SmoothnessConfig {
  double beta_lo = 0.9;
  double beta_hi = 1.9;
  double c_gap = 0.5; //!< exploration budget constant
  double c_l = 1.0;   //!< beta_est penalty constant
  double bandwidth_const = 1.0; //!< C_H, used for the bin cover padding
  Direction direction = Direction::increasing;
  MrcSearchConfig mrc;
  std::uint64_t seed = 0;

  void validate() const
  {
    if (!(beta_lo > 0.0) || !(beta_lo < 1.0) || !(beta_hi > 1.0))
      throw std::invalid_argument("SmoothnessConfig: need 0 < beta_lo < 1 < beta_hi");
  }

  //! theory precondition; a violation is reported, not fatal
  bool theory_precondition_holds() const
  {
    return beta_hi > 2.0 / std::min(beta_lo, 1.0 - beta_lo);
  }
};

//! Bandwidth-comparison levels: l1 = ceil(blo log2 n / (2 bhi + 1)^2),
//! l2 = l1 + ceil(log2(ln n) / blo), l3 = ceil(bhi/blo l1 + log2(ln n)/blo).
inline std::tuple<int, int, int> lepski_levels(double n, double beta_lo,
                                               double beta_hi)
{
  if (n < 3.0) throw std::invalid_argument("lepski_levels: n >= 3");
  const double loglog = std::log2(std::log(n));
  const int l1 = static_cast<int>(std::ceil(beta_lo * std::log2(n) /
                                            ((2.0 * beta_hi + 1.0) * (2.0 * beta_hi + 1.0))));
  const int l2 = l1 + static_cast<int>(std::ceil(loglog / beta_lo));
  const int l3 = static_cast<int>(std::ceil(beta_hi / beta_lo * l1 + loglog / beta_lo));
  return {l1, l2, l3};
}

//! Per-arm exploration budget N0 = ceil(C_gap (d + log^2 n) n^{2 blo (bhi+1)/(2 bhi+1)^2}),
//! capped so the 2 K N0 exploration rounds take at most half the horizon.
inline std::int64_t exploration_budget(std::int64_t n, int d, double beta_lo,
                                       double beta_hi, double c_gap, int arms,
                                       bool* capped = nullptr)
{
  const double logn = std::log(static_cast<double>(n));
  const double expo = 2.0 * beta_lo * (beta_hi + 1.0) /
                      ((2.0 * beta_hi + 1.0) * (2.0 * beta_hi + 1.0));
  const double raw = std::ceil(c_gap * (static_cast<double>(d) + logn * logn) *
                               std::pow(static_cast<double>(n), expo));
  const std::int64_t cap = n / (4 * arms);
  if (capped) *capped = raw > static_cast<double>(cap);
  return std::min<std::int64_t>(static_cast<std::int64_t>(raw), cap);
}

//! beta_est before clamping: -(1/l1) log2(b_max) - C_l log2(ln n)/log2(n).
inline double beta_from_bmax(double b_max, int l1, double n, double c_l)
{
  return -std::log2(b_max) / static_cast<double>(l1) -
         c_l * std::log2(std::log(n)) / std::log2(n);
}

struct BinDiag {
  int arm = 0;
  std::int64_t bin = 0; //!< lattice index: bin is [bin w, (bin+1) w)
  double lo = 0.0, hi = 0.0;
  int count = 0;
  double max_discrepancy = 0.0;
};

struct SmoothnessEstimate {
  double beta_est = 0.0;
  double b_max = 0.0;
  int l1 = 0, l2 = 0, l3 = 0;
  std::int64_t n0 = 0;
  bool budget_capped = false;
  bool zero_discrepancy = false; //!< b_max was exactly 0; clamped to beta_hi
  bool theory_warning = false;   //!< beta_hi <= 2/(beta_lo ^ (1 - beta_lo))
  std::vector<BinDiag> bins;

  SmoothnessRecord record() const { return {beta_est, b_max, l1, l2, l3, n0}; }
};

//! Smoothness estimation from per-arm exploration streams of 2 N0 samples
//! each: rank-correlation index fit on the first half, per-bin local
//! polynomial fits of the projected second half at two bandwidths, and the
//! max grid discrepancy inverted into a smoothness level.
//! `support` optionally supplies the projected covariate support per
//! direction; when absent the observed projection range stands in for it.
inline SmoothnessEstimate estimate_smoothness_from(
  const std::vector<std::vector<LabeledSample>>& per_arm, std::int64_t n,
  const SmoothnessConfig& cfg, const CovariateSpec* support = nullptr)
{
  cfg.validate();
  const int arms = static_cast<int>(per_arm.size());
  if (arms < 1) throw std::invalid_argument("estimate_smoothness: no arms");

  SmoothnessEstimate out;
  out.theory_warning = !cfg.theory_precondition_holds();
  std::tie(out.l1, out.l2, out.l3) =
    lepski_levels(static_cast<double>(n), cfg.beta_lo, cfg.beta_hi);
  out.n0 = static_cast<std::int64_t>(per_arm.front().size()) / 2;

  const double w1 = std::ldexp(1.0, -out.l1);
  const double w2 = std::ldexp(1.0, -out.l2);
  const double w3 = std::ldexp(1.0, -out.l3);
  const int degree = floor_strict(cfg.beta_hi);
  bool any_bin = false;

  for (int k = 0; k < arms; ++k) {
    const auto& stream = per_arm[static_cast<std::size_t>(k)];
    if (stream.size() < 4)
      throw std::invalid_argument("estimate_smoothness: stream too short");
    const std::size_t half = stream.size() / 2;
    std::vector<LabeledSample> first(stream.begin(),
                                     stream.begin() + static_cast<std::ptrdiff_t>(half));
    MrcSearchConfig mrc = cfg.mrc;
    mrc.seed = RandomState::substream(cfg.seed, 0x3e, static_cast<std::uint64_t>(k)).next_u64();
    const IndexEstimate index = maximize_mrc(first, mrc, cfg.direction);

    std::vector<std::pair<double, double>> projected;
    projected.reserve(stream.size() - half);
    double obs_lo = std::numeric_limits<double>::infinity();
    double obs_hi = -obs_lo;
    for (std::size_t i = half; i < stream.size(); ++i) {
      const double z = index.v.dot(stream[i].x);
      projected.emplace_back(z, stream[i].y);
      obs_lo = std::min(obs_lo, z);
      obs_hi = std::max(obs_hi, z);
    }

    // lattice bins of width 2^{-l1} intersecting the padded projected support
    double sup_lo = obs_lo, sup_hi = obs_hi;
    if (support) std::tie(sup_lo, sup_hi) = projection_range(*support, index.v);
    const double pad = cfg.bandwidth_const *
                       std::sqrt(static_cast<double>(index.v.size()) /
                                 static_cast<double>(std::max<std::int64_t>(out.n0, 1)));
    sup_lo -= pad;
    sup_hi += pad;

    const std::int64_t bin_lo = static_cast<std::int64_t>(std::floor(sup_lo / w1));
    const std::int64_t bin_hi = static_cast<std::int64_t>(std::floor(sup_hi / w1));
    std::sort(projected.begin(), projected.end());
    for (std::int64_t b = bin_lo; b <= bin_hi; ++b) {
      const double lo = static_cast<double>(b) * w1;
      const double hi = lo + w1;
      const auto begin = std::lower_bound(projected.begin(), projected.end(),
                                          std::make_pair(lo, -std::numeric_limits<double>::infinity()));
      const auto end = std::lower_bound(projected.begin(), projected.end(),
                                        std::make_pair(hi, -std::numeric_limits<double>::infinity()));
      if (begin == end) continue;
      any_bin = true;
      std::vector<std::pair<double, double>> in_bin(begin, end);
      const LinkModel coarse(in_bin, degree, w1);
      const LinkModel fine(std::move(in_bin), degree, w2);

      BinDiag diag{k, b, lo, hi, static_cast<int>(end - begin), 0.0};
      const std::int64_t g_lo = static_cast<std::int64_t>(std::ceil(lo / w3));
      for (std::int64_t g = g_lo;; ++g) {
        const double a = static_cast<double>(g) * w3;
        if (a >= hi) break;
        const LpeResult cr = coarse.fit_predict(a);
        const LpeResult fr = fine.fit_predict(a);
        // the bandwidth comparison is only meaningful where both fits are
        // honest full-degree local polynomials; deficient-window results
        // measure data sparsity, not smoothness
        if (cr.fallback || fr.fallback || cr.degree_used != degree ||
            fr.degree_used != degree)
          continue;
        const double diff = std::abs(cr.value - fr.value);
        diag.max_discrepancy = std::max(diag.max_discrepancy, diff);
      }
      out.b_max = std::max(out.b_max, diag.max_discrepancy);
      out.bins.push_back(diag);
    }
  }

  if (!any_bin)
    throw std::runtime_error("estimate_smoothness: all bins empty");
  if (out.b_max <= 1e-12) { // discrepancy at rounding scale carries no signal
    out.zero_discrepancy = true;
    out.beta_est = cfg.beta_hi;
    return out;
  }
  const double raw = beta_from_bmax(out.b_max, out.l1, static_cast<double>(n), cfg.c_l);
  out.beta_est = std::clamp(raw, cfg.beta_lo, cfg.beta_hi);
  return out;
}

//! Pull 2 N0 rounds per arm from the environment and estimate smoothness.
inline SmoothnessEstimate estimate_smoothness(const EnvironmentSpec& env,
                                              std::int64_t n,
                                              const SmoothnessConfig& cfg)
{
  cfg.validate();
  bool capped = false;
  const std::int64_t n0 =
    exploration_budget(n, env.d, cfg.beta_lo, cfg.beta_hi, cfg.c_gap, env.K, &capped);
  if (n0 < 2)
    throw std::invalid_argument("estimate_smoothness: exploration budget degenerate");
  if (n < 2 * env.K * n0)
    throw std::invalid_argument("estimate_smoothness: horizon < 2 K N0");
  std::vector<std::vector<LabeledSample>> per_arm(static_cast<std::size_t>(env.K));
  std::int64_t t = 0;
  for (int k = 0; k < env.K; ++k) {
    for (std::int64_t i = 0; i < 2 * n0; ++i, ++t) {
      RandomState cov_rng = RandomState::substream(cfg.seed, 0xc0, static_cast<std::uint64_t>(t));
      RandomState rew_rng = RandomState::substream(cfg.seed, 0x4e, static_cast<std::uint64_t>(t));
      LabeledSample s;
      s.x = sample_covariate(env.covariate_law, cov_rng);
      s.y = draw_reward(env, k, s.x, rew_rng);
      s.arm = k;
      s.t = t;
      per_arm[static_cast<std::size_t>(k)].push_back(std::move(s));
    }
  }
  SmoothnessEstimate est =
    estimate_smoothness_from(per_arm, n, cfg, &env.covariate_law);
  est.budget_capped = capped;
  return est;
}

//! Smoothness-adaptive wrapper: a pure-exploration prefix of 2 K N0 rounds
//! feeds the smoothness estimate (its regret is accrued and recorded), then
//! the batched policy plays the remaining horizon with beta_est plugged in.
inline RegretTrace run_adaptive(const EnvironmentSpec& env, std::int64_t horizon,
                                const SmoothnessConfig& cfg,
                                const BanditConfig& bandit_proto)
{
  cfg.validate();
  bool capped = false;
  const std::int64_t n0 = exploration_budget(horizon, env.d, cfg.beta_lo,
                                             cfg.beta_hi, cfg.c_gap, env.K, &capped);
  if (n0 < 2)
    throw std::invalid_argument("run_adaptive: exploration budget degenerate");
  const std::int64_t explore = 2 * static_cast<std::int64_t>(env.K) * n0;
  if (horizon <= explore)
    throw std::invalid_argument("run_adaptive: horizon too short for exploration");

  RegretTrace trace;
  std::vector<std::vector<LabeledSample>> per_arm(static_cast<std::size_t>(env.K));
  double cum = 0.0;
  std::int64_t t = 0;
  for (int k = 0; k < env.K; ++k) {
    for (std::int64_t i = 0; i < 2 * n0; ++i, ++t) {
      RandomState cov_rng = RandomState::substream(cfg.seed, 0xc0, static_cast<std::uint64_t>(t));
      RandomState rew_rng = RandomState::substream(cfg.seed, 0x4e, static_cast<std::uint64_t>(t));
      LabeledSample s;
      s.x = sample_covariate(env.covariate_law, cov_rng);
      s.y = draw_reward(env, k, s.x, rew_rng);
      s.arm = k;
      s.t = t;
      const OracleGap gap = oracle_gap(env, s.x);
      const double inst = gap.g1 - true_reward(env, k, s.x);
      cum += inst;
      trace.rows.push_back({t, k, inst, cum});
      per_arm[static_cast<std::size_t>(k)].push_back(std::move(s));
    }
  }

  SmoothnessEstimate est =
    estimate_smoothness_from(per_arm, horizon, cfg, &env.covariate_law);
  est.budget_capped = capped;
  trace.smoothness = est.record();

  BanditConfig bandit_cfg = bandit_proto;
  bandit_cfg.beta = est.beta_est;
  bandit_cfg.seed = RandomState::substream(cfg.seed, 0xb2, 0).next_u64();
  SingleIndexBandit policy(env.d, env.K, horizon - explore, bandit_cfg);
  for (int m = 1; m <= policy.schedule().M; ++m)
    run_next_epoch(policy, env, bandit_cfg.seed, trace, explore);
  return trace;
}

} // namespace sibandit
