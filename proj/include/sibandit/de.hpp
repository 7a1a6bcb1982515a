#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace sibandit {

//! Differential evolution (DE/rand/1/bin) over a box, maximizing.
//! Candidates may optionally be repaired into a feasible set after mutation;
//! the landscape is allowed to be piecewise constant, so equal-value
//! replacements are resolved with a caller-supplied preference.
struct DeConfig {
  int population_size = 16;
  int max_generations = 200;
  double mutation = 0.7;
  double crossover = 0.9;
  int patience = 40; //!< stop after this many generations without improvement
};

struct DeResult {
  Eigen::VectorXd best;
  double value = 0.0;
  std::int64_t evaluations = 0;
};

//! trace sink: (generation, best value so far)
using DeTrace = std::vector<std::pair<int, double>>;

template <class Objective, class Repair, class Prefer>
DeResult de_maximize(Objective&& objective, Repair&& repair, Prefer&& prefer,
                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                     const DeConfig& cfg, RandomState& rng,
                     DeTrace* trace = nullptr)
{
  const int dim = static_cast<int>(lo.size());
  const int np = cfg.population_size;
  if (np < 4) throw std::invalid_argument("de_maximize: population_size >= 4");
  if (dim < 1) throw std::invalid_argument("de_maximize: empty search space");

  DeResult out;
  std::vector<Eigen::VectorXd> pop(static_cast<std::size_t>(np));
  std::vector<double> val(static_cast<std::size_t>(np));

  for (int i = 0; i < np; ++i) {
    Eigen::VectorXd x(dim);
    if (i == 0) {
      x.setZero(); // deterministic anchor at the box center of symmetry
    } else {
      for (int j = 0; j < dim; ++j) x(j) = rng.uniform(lo(j), hi(j));
    }
    repair(x);
    pop[static_cast<std::size_t>(i)] = x;
    val[static_cast<std::size_t>(i)] = objective(x);
    ++out.evaluations;
  }
  int best_i = 0;
  for (int i = 1; i < np; ++i)
    if (val[static_cast<std::size_t>(i)] > val[static_cast<std::size_t>(best_i)] ||
        (val[static_cast<std::size_t>(i)] == val[static_cast<std::size_t>(best_i)] &&
         prefer(pop[static_cast<std::size_t>(i)], pop[static_cast<std::size_t>(best_i)])))
      best_i = i;
  out.best = pop[static_cast<std::size_t>(best_i)];
  out.value = val[static_cast<std::size_t>(best_i)];

  Eigen::VectorXd trial(dim);
  int stale = 0;
  for (int gen = 0; gen < cfg.max_generations && stale < cfg.patience; ++gen) {
    bool improved = false;
    for (int i = 0; i < np; ++i) {
      int r1, r2, r3;
      do { r1 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(np))); } while (r1 == i);
      do { r2 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(np))); } while (r2 == i || r2 == r1);
      do { r3 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(np))); } while (r3 == i || r3 == r2 || r3 == r1);

      const Eigen::VectorXd& xi = pop[static_cast<std::size_t>(i)];
      const int jrand = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(dim)));
      for (int j = 0; j < dim; ++j) {
        if (j == jrand || rng.uniform01() < cfg.crossover) {
          trial(j) = pop[static_cast<std::size_t>(r1)](j) +
                     cfg.mutation * (pop[static_cast<std::size_t>(r2)](j) -
                                     pop[static_cast<std::size_t>(r3)](j));
          trial(j) = std::clamp(trial(j), lo(j), hi(j));
        } else {
          trial(j) = xi(j);
        }
      }
      repair(trial);
      const double tv = objective(trial);
      ++out.evaluations;
      if (tv > val[static_cast<std::size_t>(i)] ||
          (tv == val[static_cast<std::size_t>(i)] && prefer(trial, xi))) {
        pop[static_cast<std::size_t>(i)] = trial;
        val[static_cast<std::size_t>(i)] = tv;
        if (tv > out.value || (tv == out.value && prefer(trial, out.best))) {
          if (tv > out.value) improved = true;
          out.value = tv;
          out.best = trial;
        }
      }
    }
    stale = improved ? 0 : stale + 1;
    if (trace) trace->emplace_back(gen, out.value);
  }
  return out;
}

} // namespace sibandit
