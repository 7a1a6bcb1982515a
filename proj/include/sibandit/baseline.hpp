#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bandit.hpp"
#include "env.hpp"
#include "trace.hpp"

namespace sibandit {

//! Bin-partition successive arm elimination over the d-dimensional covariate
//! box: the comparator policy. Epoch m partitions the box into cubes of side
//! proportional to n_m^{-1/(2b+d)} with n_m = ceil(C_T (1/eps_m^2)^{(2b+d)/(2b)}),
//! pulls uniformly among each cube's active arms, and eliminates per cube on
//! a Hoeffding-style confidence width.
struct SmoothBinConfig {
  double beta = 1.0;
  double c_eps = 0.5;
  std::optional<double> c_t; //!< empty: halve from 1 until n_1 <= horizon/4
  double side_scale = 2.0;   //!< cube side h_m = side_scale * n_m^{-1/(2b+d)}
  double conf_scale = 2.0;   //!< width = conf_scale * sqrt(2 log(n) K / count)
  std::uint64_t seed = 0;
};

namespace detail {

inline std::int64_t bin_epoch_length(std::int64_t n, int d, double beta,
                                     double c_t, double c_eps, int m)
{
  (void)n;
  const double eps = c_eps * std::ldexp(1.0, -m);
  const double expo = (2.0 * beta + static_cast<double>(d)) / (2.0 * beta);
  return static_cast<std::int64_t>(std::ceil(c_t * std::pow(1.0 / (eps * eps), expo)));
}

} // namespace detail

inline EpochSchedule build_bin_schedule(std::int64_t n, int d, double beta,
                                        double c_t, double c_eps)
{
  if (n < 1) throw std::invalid_argument("build_bin_schedule: n >= 1");
  EpochSchedule s;
  s.horizon = n;
  s.c_t = c_t;
  s.c_eps = c_eps;
  std::int64_t total = 0;
  for (int m = 1;; ++m) {
    const std::int64_t nm = detail::bin_epoch_length(n, d, beta, c_t, c_eps, m);
    total += nm;
    s.lengths.push_back(nm);
    s.cum.push_back(total);
    if (total >= n) break;
  }
  s.M = static_cast<int>(s.lengths.size());
  s.degenerate = s.M == 1 && s.lengths[0] > n;
  s.eps.resize(static_cast<std::size_t>(s.M));
  for (int m = 0; m < s.M; ++m) s.eps[static_cast<std::size_t>(m)] = s.epsilon(m);
  return s;
}

class SmoothBinBandit {
public:
  SmoothBinBandit(const CovariateSpec& covariates, int arms, std::int64_t horizon,
                  SmoothBinConfig cfg)
    : d_(covariates.d), arms_(arms), cfg_(std::move(cfg))
  {
    if (horizon < 0) throw std::invalid_argument("SmoothBinBandit: horizon >= 0");
    switch (covariates.family) {
      case CovariateSpec::Family::truncated_gaussian_unit_ball:
        lo_ = -1.0;
        hi_ = 1.0;
        break;
      case CovariateSpec::Family::uniform_box:
        lo_ = covariates.box_lo;
        hi_ = covariates.box_hi;
        break;
    }
    double c_t = cfg_.c_t.value_or(1.0);
    if (!cfg_.c_t && horizon > 0) {
      while (c_t > 1e-3 &&
             detail::bin_epoch_length(horizon, d_, cfg_.beta, c_t, cfg_.c_eps, 1) > horizon / 4)
        c_t *= 0.5;
      c_t = std::max(c_t, 1e-3);
    }
    if (horizon > 0) schedule_ = build_bin_schedule(horizon, d_, cfg_.beta, c_t, cfg_.c_eps);
    play_ = schedule_.play_lengths();
    horizon_ = horizon;
    if (schedule_.M > 0) enter_epoch(1);
  }

  const EpochSchedule& schedule() const { return schedule_; }

  //! cube cells per dimension in the current epoch
  int cells_per_dim() const { return cells_; }

  //! flat bin id of a covariate under the current epoch partition
  std::int64_t bin_of(const Vector& x) const
  {
    std::int64_t id = 0;
    for (int i = 0; i < d_; ++i) {
      const double rel = (x(i) - lo_) / (hi_ - lo_);
      std::int64_t c = static_cast<std::int64_t>(std::floor(rel * cells_));
      c = std::clamp<std::int64_t>(c, 0, cells_ - 1);
      id = id * cells_ + c;
    }
    return id;
  }

  const std::vector<int>& active_arms(const Vector& x)
  {
    return bin_state(bin_of(x)).active;
  }

  int select_arm(const Vector& x)
  {
    const std::vector<int>& active = active_arms(x);
    if (active.size() == 1) return active[0];
    RandomState rng = RandomState::substream(cfg_.seed, 0xac, static_cast<std::uint64_t>(t_));
    return active[rng.uniform_int(active.size())];
  }

  void observe(const Vector& x, int arm, double y)
  {
    if (t_ >= horizon_) throw std::runtime_error("SmoothBinBandit: horizon exhausted");
    BinState& bin = bin_state(bin_of(x));
    bin.count += 1;
    bin.sum[static_cast<std::size_t>(arm)] += y;
    bin.pulls[static_cast<std::size_t>(arm)] += 1;
    ++t_;
    ++in_epoch_;
    if (epoch_ <= schedule_.M && in_epoch_ >= play_[static_cast<std::size_t>(epoch_ - 1)]) {
      eliminate();
      if (epoch_ < schedule_.M) enter_epoch(epoch_ + 1);
      else ++epoch_;
      in_epoch_ = 0;
    }
  }

private:
  struct BinState {
    std::vector<int> active;
    std::vector<double> sum;
    std::vector<std::int64_t> pulls;
    std::int64_t count = 0;
  };

  void enter_epoch(int m)
  {
    epoch_ = m;
    prev_bins_ = std::move(bins_);
    bins_.clear();
    prev_cells_ = m >= 2 ? cells_ : 0;
    const std::int64_t nm = schedule_.lengths[static_cast<std::size_t>(m - 1)];
    const double side = cfg_.side_scale *
                        std::pow(static_cast<double>(nm),
                                 -1.0 / (2.0 * cfg_.beta + static_cast<double>(d_)));
    cells_ = std::max(1, static_cast<int>(std::ceil((hi_ - lo_) / side)));
  }

  BinState& bin_state(std::int64_t id)
  {
    auto it = bins_.find(id);
    if (it != bins_.end()) return it->second;
    BinState fresh;
    fresh.active = inherit_active(id);
    fresh.sum.assign(static_cast<std::size_t>(arms_), 0.0);
    fresh.pulls.assign(static_cast<std::size_t>(arms_), 0);
    return bins_.emplace(id, std::move(fresh)).first->second;
  }

  //! active set inherited from the previous epoch's cube containing this
  //! cube's center; the full arm set for the first epoch
  std::vector<int> inherit_active(std::int64_t id) const
  {
    std::vector<int> all(static_cast<std::size_t>(arms_));
    for (int k = 0; k < arms_; ++k) all[static_cast<std::size_t>(k)] = k;
    if (prev_bins_.empty() || prev_cells_ == 0) return all;
    // decode cell coordinates, map center into previous partition
    std::vector<std::int64_t> coord(static_cast<std::size_t>(d_));
    std::int64_t rest = id;
    for (int i = d_ - 1; i >= 0; --i) {
      coord[static_cast<std::size_t>(i)] = rest % cells_;
      rest /= cells_;
    }
    std::int64_t prev_id = 0;
    for (int i = 0; i < d_; ++i) {
      const double center = (static_cast<double>(coord[static_cast<std::size_t>(i)]) + 0.5) / cells_;
      std::int64_t c = static_cast<std::int64_t>(std::floor(center * prev_cells_));
      c = std::clamp<std::int64_t>(c, 0, prev_cells_ - 1);
      prev_id = prev_id * prev_cells_ + c;
    }
    const auto it = prev_bins_.find(prev_id);
    return it == prev_bins_.end() ? all : it->second.active;
  }

  void eliminate()
  {
    const double logn = std::log(static_cast<double>(std::max<std::int64_t>(horizon_, 2)));
    for (auto& [id, bin] : bins_) {
      if (bin.count == 0 || bin.active.size() <= 1) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int k : bin.active) {
        if (bin.pulls[static_cast<std::size_t>(k)] == 0) continue;
        best = std::max(best, bin.sum[static_cast<std::size_t>(k)] /
                                static_cast<double>(bin.pulls[static_cast<std::size_t>(k)]));
      }
      const double width = cfg_.conf_scale *
                           std::sqrt(2.0 * logn * static_cast<double>(arms_) /
                                     static_cast<double>(bin.count));
      std::vector<int> kept;
      for (int k : bin.active) {
        const std::int64_t p = bin.pulls[static_cast<std::size_t>(k)];
        if (p == 0) {
          kept.push_back(k); // never pulled here: cannot be judged
          continue;
        }
        const double mean = bin.sum[static_cast<std::size_t>(k)] / static_cast<double>(p);
        if (best - mean <= width) kept.push_back(k);
      }
      if (!kept.empty()) bin.active = std::move(kept);
    }
  }

  int d_;
  int arms_;
  SmoothBinConfig cfg_;
  EpochSchedule schedule_;
  std::vector<std::int64_t> play_;
  double lo_ = -1.0, hi_ = 1.0;
  std::int64_t horizon_ = 0;
  std::int64_t t_ = 0;
  std::int64_t in_epoch_ = 0;
  int epoch_ = 0;
  int cells_ = 1;
  int prev_cells_ = 0;
  std::map<std::int64_t, BinState> bins_;
  std::map<std::int64_t, BinState> prev_bins_;
};

//! Full-horizon comparator run with the same regret accounting as the
//! primary policy.
inline RegretTrace run_smoothbandit(const EnvironmentSpec& env, std::int64_t horizon,
                                    const SmoothBinConfig& cfg)
{
  RegretTrace trace;
  if (horizon <= 0) return trace;
  SmoothBinBandit policy(env.covariate_law, env.K, horizon, cfg);
  double cum = 0.0;
  for (std::int64_t t = 0; t < horizon; ++t) {
    RandomState cov_rng = RandomState::substream(cfg.seed, 0xc0, static_cast<std::uint64_t>(t));
    RandomState rew_rng = RandomState::substream(cfg.seed, 0x4e, static_cast<std::uint64_t>(t));
    const Vector x = sample_covariate(env.covariate_law, cov_rng);
    const int arm = policy.select_arm(x);
    const double y = draw_reward(env, arm, x, rew_rng);
    policy.observe(x, arm, y);
    const OracleGap gap = oracle_gap(env, x);
    const double inst = gap.g1 - true_reward(env, arm, x);
    cum += inst;
    trace.rows.push_back({t, arm, inst, cum});
  }
  return trace;
}

} // namespace sibandit
