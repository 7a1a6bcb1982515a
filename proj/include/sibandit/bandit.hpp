#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "env.hpp"
#include "sireg.hpp"
#include "trace.hpp"

namespace sibandit {

//! Exponential epoch schedule: eps_m = c_eps 2^{-m}, epoch lengths
//!   n_m = ceil(C_T ((d + log^2 n) / eps_m^{2/min(1,b)}
//!              + (log n / eps_m^2)^{(2b+1)/(2b)})),
//! natural logs, n_0 = 0, and M the first m whose cumulative length covers
//! the horizon. `lengths` holds the formula values; the played final epoch
//! is truncated so the total equals the horizon.
struct EpochSchedule {
  int M = 0;
  std::vector<double> eps;            //!< eps_0 .. eps_{M-1}
  std::vector<std::int64_t> lengths;  //!< n_1 .. n_M (untruncated)
  std::vector<std::int64_t> cum;      //!< S_1 .. S_M
  std::int64_t horizon = 0;
  double c_t = 1.0;
  double c_eps = 0.5;
  bool degenerate = false; //!< n_1 alone exceeded the horizon

  double epsilon(int m) const { return c_eps * std::ldexp(1.0, -m); }

  std::vector<std::int64_t> play_lengths() const
  {
    std::vector<std::int64_t> out = lengths;
    if (!out.empty()) {
      const std::int64_t before = M >= 2 ? cum[static_cast<std::size_t>(M - 2)] : 0;
      out.back() = horizon - before;
    }
    return out;
  }
};

inline std::int64_t epoch_length_formula(std::int64_t n, int d, double beta,
                                         double c_t, double c_eps, int m)
{
  const double logn = std::log(static_cast<double>(n));
  const double eps = c_eps * std::ldexp(1.0, -m);
  const double t1 = (static_cast<double>(d) + logn * logn) /
                    std::pow(eps, 2.0 / std::min(1.0, beta));
  const double t2 = std::pow(logn / (eps * eps), (2.0 * beta + 1.0) / (2.0 * beta));
  return static_cast<std::int64_t>(std::ceil(c_t * (t1 + t2)));
}

inline EpochSchedule build_schedule(std::int64_t n, int d, double beta,
                                    double c_t, double c_eps)
{
  if (n < 1) throw std::invalid_argument("build_schedule: n >= 1");
  if (!(c_eps > 0.0) || c_eps > 0.6)
    throw std::invalid_argument("build_schedule: c_eps in (0, 0.6]");
  EpochSchedule s;
  s.horizon = n;
  s.c_t = c_t;
  s.c_eps = c_eps;
  std::int64_t total = 0;
  for (int m = 1;; ++m) {
    const std::int64_t nm = epoch_length_formula(n, d, beta, c_t, c_eps, m);
    total += nm;
    s.lengths.push_back(nm);
    s.cum.push_back(total);
    if (total >= n) break;
  }
  s.M = static_cast<int>(s.lengths.size());
  s.degenerate = s.M == 1 && s.lengths[0] > n;
  s.eps.resize(static_cast<std::size_t>(s.M));
  for (int m = 0; m < s.M; ++m)
    s.eps[static_cast<std::size_t>(m)] = s.epsilon(m);
  return s;
}

//! Halve C_T from `initial` (floor 1e-3) until the first epoch takes at most
//! a quarter of the horizon and the schedule spans at least four epochs, so
//! desk-scale horizons see several refinement rounds.
inline double calibrate_ct(std::int64_t n, int d, double beta, double c_eps,
                           double initial = 1.0)
{
  double c_t = initial;
  while (c_t > 1e-3) {
    const EpochSchedule s = build_schedule(n, d, beta, c_t, c_eps);
    if (s.lengths[0] <= n / 4 && s.M >= 4) break;
    c_t *= 0.5;
  }
  return std::max(c_t, 1e-3);
}

struct BanditConfig {
  double beta = 1.0;
  double c_eps = 0.5;
  std::optional<double> c_t; //!< empty: calibrate at startup
  double bandwidth_const = 1.0; //!< C_H
  double region_widening = 1.0; //!< c_H
  bool cross_fit = true;
  Direction direction = Direction::increasing;
  MrcSearchConfig mrc;
  std::uint64_t seed = 0;
};

//! The batched single-index policy as an online state machine: call
//! select_arm for the incoming covariate, then observe with the reward.
//! Estimators refit at epoch boundaries only; estimators of finished epochs
//! are frozen, so decisions depend only on strictly earlier observations.
class SingleIndexBandit {
public:
  SingleIndexBandit(int d, int arms, std::int64_t horizon, BanditConfig cfg)
    : d_(d), arms_(arms), cfg_(std::move(cfg))
  {
    if (d_ < 1 || arms_ < 1)
      throw std::invalid_argument("SingleIndexBandit: d, arms >= 1");
    if (horizon < 0) throw std::invalid_argument("SingleIndexBandit: horizon >= 0");
    const double c_t = cfg_.c_t ? *cfg_.c_t
                                : calibrate_ct(std::max<std::int64_t>(horizon, 1),
                                               d_, cfg_.beta, cfg_.c_eps);
    if (horizon > 0) schedule_ = build_schedule(horizon, d_, cfg_.beta, c_t, cfg_.c_eps);
    play_ = schedule_.play_lengths();
    estimators_.emplace_back(static_cast<std::size_t>(arms_)); // epoch 0: zero functions
    logs_.resize(static_cast<std::size_t>(arms_));
    fit_size_.assign(static_cast<std::size_t>(arms_), 0);
    min_fit_ = 4 * (static_cast<std::size_t>(floor_strict(cfg_.beta)) + 2);
  }

  const EpochSchedule& schedule() const { return schedule_; }
  int completed_epochs() const { return static_cast<int>(estimators_.size()) - 1; }
  std::int64_t steps_taken() const { return t_; }

  //! Active arm set K_m(x) after m completed epochs (m = 0 gives all arms).
  std::vector<int> active_set(const Vector& x, int m) const
  {
    if (m < 0 || m > completed_epochs())
      throw std::invalid_argument("active_set: epoch not yet available");
    std::vector<int> set(static_cast<std::size_t>(arms_));
    for (int k = 0; k < arms_; ++k) set[static_cast<std::size_t>(k)] = k;
    std::vector<double> values(static_cast<std::size_t>(arms_));
    for (int j = 1; j <= m; ++j) {
      // pre-select on the previous epoch's estimates at eps_{j-1}/2
      filter(set, values, x, j - 1, 0.5 * schedule_.epsilon(j - 1));
      // refine on this epoch's estimates at eps_j
      filter(set, values, x, j, schedule_.epsilon(j));
    }
    return set;
  }

  int select_arm(const Vector& x)
  {
    const std::vector<int> set = active_set(x, completed_epochs());
    if (set.size() == 1) return set[0];
    RandomState rng = RandomState::substream(cfg_.seed, 0xac, static_cast<std::uint64_t>(t_));
    return set[rng.uniform_int(set.size())];
  }

  void observe(const Vector& x, int arm, double y)
  {
    if (t_ >= schedule_.horizon)
      throw std::runtime_error("SingleIndexBandit: horizon exhausted");
    LabeledSample s;
    s.x = x;
    s.y = y;
    s.arm = arm;
    s.t = t_;
    logs_[static_cast<std::size_t>(arm)].push_back(std::move(s));
    ++t_;
    ++in_epoch_;
    const int m = completed_epochs(); // epoch being played is m + 1
    if (m < static_cast<int>(play_.size()) && in_epoch_ >= play_[static_cast<std::size_t>(m)])
      finish_epoch();
  }

  //! Estimator for (epoch, arm); empty means the zero function.
  const std::shared_ptr<const RewardEstimator>& estimator(int epoch, int arm) const
  {
    return estimators_[static_cast<std::size_t>(epoch)][static_cast<std::size_t>(arm)];
  }

  struct RefitEvent {
    int epoch = 0;
    int arm = 0;
    bool refit = false; //!< false when the previous estimator was inherited
  };
  const std::vector<RefitEvent>& refit_log() const { return refits_; }

private:
  double ghat(int epoch, int arm, const Vector& x) const
  {
    const auto& est = estimators_[static_cast<std::size_t>(epoch)][static_cast<std::size_t>(arm)];
    return est ? est->predict(x).value : 0.0;
  }

  void filter(std::vector<int>& set, std::vector<double>& values,
              const Vector& x, int epoch, double tol) const
  {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i) {
      values[i] = ghat(epoch, set[i], x);
      best = std::max(best, values[i]);
    }
    std::size_t keep = 0;
    for (std::size_t i = 0; i < set.size(); ++i)
      if (best - values[i] <= tol) set[keep++] = set[i];
    set.resize(keep);
  }

  void finish_epoch()
  {
    const int m = completed_epochs() + 1; // 1-based epoch just finished
    std::vector<std::shared_ptr<const RewardEstimator>> next(static_cast<std::size_t>(arms_));
    for (int k = 0; k < arms_; ++k) {
      auto& log = logs_[static_cast<std::size_t>(k)];
      // refit only when the fresh log is at least as informative as the data
      // behind the current estimator; a shrunken log means the arm was
      // mostly eliminated and keeps its fit
      if (log.size() >= min_fit_ && log.size() >= fit_size_[static_cast<std::size_t>(k)]) {
        SiregOptions opt;
        opt.beta = cfg_.beta;
        opt.bandwidth_const = cfg_.bandwidth_const;
        opt.region_widening = cfg_.region_widening;
        opt.cross_fit = cfg_.cross_fit;
        opt.direction = cfg_.direction;
        opt.mrc = cfg_.mrc;
        opt.seed = RandomState::substream(
          cfg_.seed, 0xf1, (static_cast<std::uint64_t>(m) << 16) |
                             static_cast<std::uint64_t>(k)).next_u64();
        next[static_cast<std::size_t>(k)] =
          std::make_shared<const RewardEstimator>(fit_sireg(log, opt));
        fit_size_[static_cast<std::size_t>(k)] = log.size();
        refits_.push_back({m, k, true});
      } else {
        next[static_cast<std::size_t>(k)] = estimators_.back()[static_cast<std::size_t>(k)];
        refits_.push_back({m, k, false});
      }
      log.clear();
    }
    estimators_.push_back(std::move(next));
    in_epoch_ = 0;
  }

  int d_;
  int arms_;
  BanditConfig cfg_;
  EpochSchedule schedule_;
  std::vector<std::int64_t> play_;
  std::vector<std::vector<std::shared_ptr<const RewardEstimator>>> estimators_;
  std::vector<std::vector<LabeledSample>> logs_; //!< S_{k,m} for the open epoch
  std::vector<std::size_t> fit_size_; //!< samples behind each arm's current fit
  std::vector<RefitEvent> refits_;
  std::size_t min_fit_ = 8;
  std::int64_t t_ = 0;
  std::int64_t in_epoch_ = 0;
};

namespace detail {

inline void append_diag(const SingleIndexBandit& policy,
                        const EnvironmentSpec& env, int epoch,
                        RegretTrace& trace)
{
  for (int k = 0; k < env.K; ++k) {
    const auto& est = policy.estimator(epoch, k);
    if (!est) continue;
    IndexDiagRow row;
    row.epoch = epoch;
    row.arm = k;
    row.index_error = (est->index().v - env.indices[static_cast<std::size_t>(k)]).norm();
    row.objective = est->index().objective_value;
    trace.diag.push_back(row);
  }
}

} // namespace detail

//! Play one full epoch of the policy against the environment, appending
//! regret rows and end-of-epoch diagnostics. Steps consume per-time-step
//! substreams of `seed`, so a replay is bit-identical.
inline void run_next_epoch(SingleIndexBandit& policy, const EnvironmentSpec& env,
                           std::uint64_t seed, RegretTrace& trace,
                           std::int64_t t_offset = 0)
{
  const int epoch = policy.completed_epochs() + 1;
  if (epoch > policy.schedule().M)
    throw std::runtime_error("run_next_epoch: schedule exhausted");
  const std::int64_t len = policy.schedule().play_lengths()[static_cast<std::size_t>(epoch - 1)];
  double cum = trace.rows.empty() ? 0.0 : trace.rows.back().cum_regret;
  for (std::int64_t i = 0; i < len; ++i) {
    const std::int64_t t = policy.steps_taken();
    RandomState cov_rng = RandomState::substream(seed, 0xc0, static_cast<std::uint64_t>(t + t_offset));
    RandomState rew_rng = RandomState::substream(seed, 0x4e, static_cast<std::uint64_t>(t + t_offset));
    const Vector x = sample_covariate(env.covariate_law, cov_rng);
    const int arm = policy.select_arm(x);
    const double y = draw_reward(env, arm, x, rew_rng);
    policy.observe(x, arm, y);
    const OracleGap gap = oracle_gap(env, x);
    const double inst = gap.g1 - true_reward(env, arm, x);
    cum += inst;
    trace.rows.push_back({t + t_offset, arm, inst, cum});
  }
  detail::append_diag(policy, env, epoch, trace);
}

//! Full-horizon run of the batched single-index policy.
inline RegretTrace run_policy(const EnvironmentSpec& env, std::int64_t horizon,
                              const BanditConfig& cfg)
{
  RegretTrace trace;
  if (horizon <= 0) return trace;
  SingleIndexBandit policy(env.d, env.K, horizon, cfg);
  for (int m = 1; m <= policy.schedule().M; ++m)
    run_next_epoch(policy, env, cfg.seed, trace);
  return trace;
}

} // namespace sibandit
