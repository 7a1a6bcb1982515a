#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "de.hpp"
#include "env.hpp"
#include "rng.hpp"

namespace sibandit {

enum class Direction { increasing, decreasing };

//! Estimated index vector, normalized to first coordinate 1.
struct IndexEstimate {
  Vector v;
  double objective_value = 0.0;
  Direction direction = Direction::increasing;
};

//! Search configuration for the rank-correlation maximizer. The objective
//! itself has no tuning parameters; everything here controls the
//! differential-evolution search over {u : u_1 = 1, ||u||_2 <= bound}.
struct MrcSearchConfig {
  double bound = 2.0; //!< B_v
  int population_size = 0; //!< 0 means 15 * (d - 1)
  int max_generations = 200;
  int restarts = 2;
  double mutation = 0.7;
  double crossover = 0.9;
  std::uint64_t seed = 0;
  std::optional<int> subsample_cap;
};

namespace detail {

//! Fenwick tree over dense y-ranks; counts inserted points per rank.
class RankTree {
public:
  explicit RankTree(int levels) : tree_(static_cast<std::size_t>(levels) + 1, 0) {}

  void add(int rank) // 1-based
  {
    for (int i = rank; i < static_cast<int>(tree_.size()); i += i & -i)
      ++tree_[static_cast<std::size_t>(i)];
  }

  std::uint64_t prefix(int rank) const // count of ranks <= rank
  {
    std::uint64_t s = 0;
    for (int i = rank; i > 0; i -= i & -i) s += tree_[static_cast<std::size_t>(i)];
    return s;
  }

  void clear() { std::fill(tree_.begin(), tree_.end(), 0); }

private:
  std::vector<std::uint64_t> tree_;
};

struct ConcordanceCounts {
  std::uint64_t concordant = 0; //!< pairs strictly increasing in both (p, y)
  std::uint64_t discordant = 0; //!< pairs strictly increasing in p, decreasing in y
};

//! Counts strictly concordant / discordant pairs of (projection, y-rank) in
//! O(n log n): sweep projections in ascending order, batching exact ties so
//! tied projections contribute to neither count.
class ConcordanceCounter {
public:
  ConcordanceCounter(std::vector<int> yrank, int levels)
    : yrank_(std::move(yrank)),
      tree_(levels),
      order_(yrank_.size())
  {}

  ConcordanceCounts count(const double* proj)
  {
    const std::size_t n = yrank_.size();
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(),
              [proj](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });
    tree_.clear();
    ConcordanceCounts out;
    std::uint64_t inserted = 0;
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && proj[order_[j]] == proj[order_[i]]) ++j;
      for (std::size_t k = i; k < j; ++k) {
        const int r = yrank_[order_[k]];
        const std::uint64_t leq = tree_.prefix(r);
        out.concordant += tree_.prefix(r - 1);
        out.discordant += inserted - leq;
      }
      for (std::size_t k = i; k < j; ++k) tree_.add(yrank_[order_[k]]);
      inserted += j - i;
      i = j;
    }
    return out;
  }

private:
  std::vector<int> yrank_;
  RankTree tree_;
  std::vector<std::size_t> order_;
};

inline std::vector<int> dense_y_ranks(const std::vector<double>& y, int& levels)
{
  std::vector<double> sorted(y);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  levels = static_cast<int>(sorted.size());
  std::vector<int> ranks(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    ranks[i] = 1 + static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), y[i]) - sorted.begin());
  return ranks;
}

//! Sample set laid out for repeated objective evaluation along candidate
//! indices u = [1, theta]: projections are x1 + Xfree * theta.
struct RankData {
  Matrix xfree;   // n x (d-1)
  Vector x1;      // first coordinates
  std::vector<int> yrank;
  int levels = 0;

  static RankData from_samples(const std::vector<LabeledSample>& samples)
  {
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto d = samples.front().x.size();
    RankData rd;
    rd.xfree.resize(n, d - 1);
    rd.x1.resize(n);
    std::vector<double> y(samples.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      rd.x1(i) = samples[static_cast<std::size_t>(i)].x(0);
      rd.xfree.row(i) = samples[static_cast<std::size_t>(i)].x.tail(d - 1);
      y[static_cast<std::size_t>(i)] = samples[static_cast<std::size_t>(i)].y;
    }
    rd.yrank = dense_y_ranks(y, rd.levels);
    return rd;
  }
};

inline double gamma_from_counts(const ConcordanceCounts& c, std::size_t n,
                                Direction dir)
{
  const double denom = static_cast<double>(n) * static_cast<double>(n - 1);
  const std::uint64_t num = dir == Direction::increasing ? c.concordant : c.discordant;
  return static_cast<double>(num) / denom;
}

} // namespace detail

//! Empirical rank correlation Gamma_S(v): the fraction (over ordered pairs)
//! of samples with Y_i > Y_j and X_i'v > X_j'v; the decreasing direction
//! uses Y_i < Y_j instead. Ties in y or in the projection contribute zero.
//! Computed in O(n log n); matches the quadratic pair loop exactly because
//! both reduce to the same integer pair count.
inline double rank_objective(const std::vector<LabeledSample>& samples,
                             const Vector& v, Direction dir)
{
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("rank_objective: need >= 2 samples");
  std::vector<double> y(n), proj(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = samples[i].y;
    proj[i] = v.dot(samples[i].x);
  }
  int levels = 0;
  auto ranks = detail::dense_y_ranks(y, levels);
  detail::ConcordanceCounter counter(std::move(ranks), levels);
  return detail::gamma_from_counts(counter.count(proj.data()), n, dir);
}

//! Maximize the rank correlation over {u : u_1 = 1, ||u||_2 <= bound} by
//! differential evolution on the free coordinates. The objective is
//! piecewise constant, so equal-objective ties are broken by smaller l2
//! norm, then lexicographically. Deterministic given the config seed.
inline IndexEstimate maximize_mrc(const std::vector<LabeledSample>& samples,
                                  const MrcSearchConfig& cfg, Direction dir,
                                  DeTrace* trace = nullptr)
{
  if (samples.size() < 2)
    throw std::invalid_argument("maximize_mrc: need >= 2 samples");
  const int d = static_cast<int>(samples.front().x.size());
  if (d < 2) throw std::invalid_argument("maximize_mrc: d >= 2");
  if (cfg.bound < 1.0)
    throw std::invalid_argument("maximize_mrc: empty search space (bound < 1)");

  std::vector<LabeledSample> work;
  const std::vector<LabeledSample>* data = &samples;
  const std::size_t cap =
    cfg.subsample_cap ? static_cast<std::size_t>(std::max(2, *cfg.subsample_cap)) : 0;
  if (cap != 0 && cap < samples.size()) {
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    RandomState shuffle_rng = RandomState::substream(cfg.seed, 0x5a, 0);
    for (std::size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[shuffle_rng.uniform_int(i + 1)]);
    idx.resize(cap);
    work.reserve(idx.size());
    for (std::size_t i : idx) work.push_back(samples[i]);
    data = &work;
  }

  auto rd = detail::RankData::from_samples(*data);
  const std::size_t n = data->size();
  detail::ConcordanceCounter counter(rd.yrank, rd.levels);
  Vector proj(static_cast<Eigen::Index>(n));
  auto objective = [&](const Vector& theta) {
    proj = rd.x1 + rd.xfree * theta;
    return detail::gamma_from_counts(counter.count(proj.data()), n, dir);
  };

  const double free_cap = std::sqrt(cfg.bound * cfg.bound - 1.0);
  auto repair = [free_cap](Vector& theta) {
    const double norm = theta.norm();
    if (norm > free_cap && norm > 0.0) theta *= free_cap / norm;
  };
  auto prefer = [](const Vector& a, const Vector& b) {
    const double na = a.squaredNorm(), nb = b.squaredNorm();
    if (na != nb) return na < nb;
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (a(j) != b(j)) return a(j) < b(j);
    return false;
  };

  DeConfig de;
  de.population_size = cfg.population_size > 0 ? cfg.population_size : 15 * (d - 1);
  de.max_generations = cfg.max_generations;
  de.mutation = cfg.mutation;
  de.crossover = cfg.crossover;
  const Vector lo = Vector::Constant(d - 1, -free_cap);
  const Vector hi = Vector::Constant(d - 1, free_cap);

  DeResult best;
  bool have_best = false;
  const int restarts = std::max(1, cfg.restarts);
  for (int r = 0; r < restarts; ++r) {
    RandomState rng = RandomState::substream(cfg.seed, 0xde, static_cast<std::uint64_t>(r));
    DeResult res = de_maximize(objective, repair, prefer, lo, hi, de, rng,
                               r == 0 ? trace : nullptr);
    if (!have_best || res.value > best.value ||
        (res.value == best.value && prefer(res.best, best.best))) {
      best = res;
      have_best = true;
    }
  }

  IndexEstimate out;
  out.v.resize(d);
  out.v(0) = 1.0;
  out.v.tail(d - 1) = best.best;
  out.objective_value = best.value;
  out.direction = dir;
  return out;
}

//! Pick the link direction by running the search under both kernels at a
//! reduced budget; ties go to increasing.
inline Direction choose_direction(const std::vector<LabeledSample>& samples,
                                  const MrcSearchConfig& cfg = {})
{
  MrcSearchConfig quick = cfg;
  quick.max_generations = std::max(20, cfg.max_generations / 4);
  quick.restarts = 1;
  const double up = maximize_mrc(samples, quick, Direction::increasing).objective_value;
  const double down = maximize_mrc(samples, quick, Direction::decreasing).objective_value;
  return down > up ? Direction::decreasing : Direction::increasing;
}

} // namespace sibandit
