#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "env.hpp"
#include "lpe.hpp"
#include "mrc.hpp"

namespace sibandit {

//! Offline single-index regression: split, rank-correlation index fit on one
//! half, local polynomial link fit on the projected other half, with an
//! optional cross-fit that swaps the halves and averages predictions.
struct SiregOptions {
  double beta = 1.0;
  double bandwidth_const = 1.0; //!< C_H in the bandwidth rule
  double region_widening = 1.0; //!< c_H: evaluable range is observed +- c_H * h_n
  std::uint64_t seed = 0;
  bool cross_fit = false;
  bool swap_split = false; //!< diagnostic: fit the mirrored single split
  Direction direction = Direction::increasing;
  MrcSearchConfig mrc;
  DeTrace* mrc_trace = nullptr; //!< optional optimizer trace (primary split)
};

class RewardEstimator {
public:
  struct Fit {
    IndexEstimate index;
    LinkModel link;
    double region_lo = 0.0;
    double region_hi = 0.0;
  };

  struct Prediction {
    double value = 0.0;
    bool in_region = true;
  };

  RewardEstimator(Fit primary, std::optional<Fit> partner, double bandwidth)
    : primary_(std::move(primary)), partner_(std::move(partner)), h_(bandwidth)
  {}

  const IndexEstimate& index() const { return primary_.index; }
  const LinkModel& link() const { return primary_.link; }
  std::pair<double, double> evaluable_region() const
  {
    return {primary_.region_lo, primary_.region_hi};
  }
  const std::optional<Fit>& cross_fit_partner() const { return partner_; }
  double bandwidth() const { return h_; }

  //! Project x onto the stored index and evaluate the link. Projections
  //! outside the evaluable region are clamped to the nearest boundary and
  //! flagged; cross-fit predictions are the mean of the two plug-in fits.
  Prediction predict(const Vector& x) const
  {
    Prediction a = eval_fit(primary_, x);
    if (!partner_) return a;
    const Prediction b = eval_fit(*partner_, x);
    return {0.5 * (a.value + b.value), a.in_region && b.in_region};
  }

private:
  static Prediction eval_fit(const Fit& fit, const Vector& x)
  {
    const double proj = fit.index.v.dot(x);
    const bool in = proj >= fit.region_lo && proj <= fit.region_hi;
    const double a = std::clamp(proj, fit.region_lo, fit.region_hi);
    return {fit.link.fit_predict(a).value, in};
  }

  Fit primary_;
  std::optional<Fit> partner_;
  double h_;
};

namespace detail {

inline RewardEstimator::Fit fit_one_split(
  const std::vector<LabeledSample>& mrc_half,
  const std::vector<LabeledSample>& lpe_half, const SiregOptions& opt,
  double h_n, std::uint64_t mrc_stream, DeTrace* trace)
{
  MrcSearchConfig mrc = opt.mrc;
  mrc.seed = RandomState::substream(opt.seed, 0x51, mrc_stream).next_u64();
  IndexEstimate index = maximize_mrc(mrc_half, mrc, opt.direction, trace);

  std::vector<std::pair<double, double>> projected;
  projected.reserve(lpe_half.size());
  for (const LabeledSample& s : lpe_half)
    projected.emplace_back(index.v.dot(s.x), s.y);

  LinkModel link(std::move(projected), floor_strict(opt.beta), h_n);
  const double pad = opt.region_widening * h_n;
  RewardEstimator::Fit fit{std::move(index), std::move(link), 0.0, 0.0};
  fit.region_lo = fit.link.domain_lo() - pad;
  fit.region_hi = fit.link.domain_hi() + pad;
  fit.link.set_domain(fit.region_lo, fit.region_hi);
  return fit;
}

} // namespace detail

inline RewardEstimator fit_sireg(const std::vector<LabeledSample>& samples,
                                 const SiregOptions& opt)
{
  if (samples.size() < 4)
    throw std::invalid_argument("fit_sireg: need >= 4 samples");
  const int d = static_cast<int>(samples.front().x.size());

  // even/odd interleave by arrival order: deterministic and balanced
  std::vector<LabeledSample> even, odd;
  even.reserve((samples.size() + 1) / 2);
  odd.reserve(samples.size() / 2);
  for (std::size_t i = 0; i < samples.size(); ++i)
    (i % 2 == 0 ? even : odd).push_back(samples[i]);

  const double h_n =
    bandwidth_hn(static_cast<double>(samples.size()), d, opt.beta, opt.bandwidth_const);

  const auto* first_mrc = opt.swap_split ? &odd : &even;
  const auto* first_lpe = opt.swap_split ? &even : &odd;
  const std::uint64_t first_tag = opt.swap_split ? 1 : 0;
  RewardEstimator::Fit primary =
    detail::fit_one_split(*first_mrc, *first_lpe, opt, h_n, first_tag, opt.mrc_trace);

  std::optional<RewardEstimator::Fit> partner;
  if (opt.cross_fit)
    partner = detail::fit_one_split(*first_lpe, *first_mrc, opt, h_n, 1 - first_tag, nullptr);

  return RewardEstimator(std::move(primary), std::move(partner), h_n);
}

//! Convenience overload mirroring the operation contract.
inline RewardEstimator fit_sireg(const std::vector<LabeledSample>& samples,
                                 double beta, double bandwidth_const,
                                 std::uint64_t seed, bool cross_fit)
{
  SiregOptions opt;
  opt.beta = beta;
  opt.bandwidth_const = bandwidth_const;
  opt.seed = seed;
  opt.cross_fit = cross_fit;
  return fit_sireg(samples, opt);
}

} // namespace sibandit
