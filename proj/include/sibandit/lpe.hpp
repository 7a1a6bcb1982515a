#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sibandit {

//! Largest integer strictly smaller than beta, for beta > 0.
//! floor_strict(1.0) == 0, floor_strict(1.5) == 1, floor_strict(3.0) == 2.
inline int floor_strict(double beta)
{
  if (beta <= 0.0) throw std::invalid_argument("floor_strict: beta > 0");
  return static_cast<int>(std::ceil(beta)) - 1;
}

//! Regression bandwidth h_n = (log n / n)^{1/(2b+1)} v C_H sqrt((d + log^2 n)/n),
//! natural logarithms.
inline double bandwidth_hn(double n, int d, double beta, double c_h)
{
  if (n < 2.0) throw std::invalid_argument("bandwidth_hn: n >= 2");
  const double logn = std::log(n);
  const double rough = std::pow(logn / n, 1.0 / (2.0 * beta + 1.0));
  const double parametric = c_h * std::sqrt((static_cast<double>(d) + logn * logn) / n);
  return std::max(rough, parametric);
}

struct LpeResult {
  double value = 0.0;
  bool fallback = false;  //!< nearest-neighbor expansion was needed
  bool in_domain = true;  //!< query lay inside the declared domain
  int degree_used = 0;
};

//! One-dimensional local polynomial regressor with uniform kernel.
//! Immutable after construction; fit_predict solves the weighted least
//! squares fit of a degree-p polynomial in (z - a) over the window
//! |z - a| <= h and returns the fitted intercept.
class LinkModel {
public:
  LinkModel(std::vector<std::pair<double, double>> pairs, int degree,
            double bandwidth)
  {
    if (pairs.empty()) throw std::invalid_argument("LinkModel: empty training set");
    if (degree < 0) throw std::invalid_argument("LinkModel: degree >= 0");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("LinkModel: bandwidth > 0");
    degree_ = degree;
    h_ = bandwidth;
    std::sort(pairs.begin(), pairs.end());
    z_.reserve(pairs.size());
    y_.reserve(pairs.size());
    for (const auto& [z, y] : pairs) {
      z_.push_back(z);
      y_.push_back(y);
    }
    dom_lo_ = z_.front();
    dom_hi_ = z_.back();
  }

  int degree() const { return degree_; }
  double bandwidth() const { return h_; }
  std::size_t size() const { return z_.size(); }
  double domain_lo() const { return dom_lo_; }
  double domain_hi() const { return dom_hi_; }

  //! Widen (or override) the evaluable range; callers that know the
  //! population support may extend past the observed projections.
  void set_domain(double lo, double hi)
  {
    if (lo > hi) throw std::invalid_argument("LinkModel: empty domain");
    dom_lo_ = lo;
    dom_hi_ = hi;
  }

  LpeResult fit_predict(double a) const
  {
    LpeResult out;
    out.in_domain = a >= dom_lo_ && a <= dom_hi_;

    const auto first = std::lower_bound(z_.begin(), z_.end(), a - h_);
    const auto last = std::upper_bound(z_.begin(), z_.end(), a + h_);
    const std::size_t lo = static_cast<std::size_t>(first - z_.begin());
    const std::size_t m = static_cast<std::size_t>(last - first);

    // Deficient windows reduce the degree one step at a time; a window that
    // cannot even support a mean falls back to the nearest neighbors.
    // Degrees >= 1 additionally require the query inside the design hull
    // with a span of at least a quarter bandwidth: one-sided or clustered
    // windows turn the polynomial into a wild extrapolation at the query.
    const double span = m > 0 ? z_[lo + m - 1] - z_[lo] : 0.0;
    const bool anchored = m > 0 && span >= 0.25 * h_ && a >= z_[lo] && a <= z_[lo + m - 1];
    for (int p = degree_; p >= 0; --p) {
      if (m < static_cast<std::size_t>(p) + 1) continue;
      if (p >= 1 && !anchored) continue;
      if (p == 0) {
        double sum = 0.0;
        for (std::size_t i = lo; i < lo + m; ++i) sum += y_[i];
        out.value = sum / static_cast<double>(m);
        out.degree_used = 0;
        return out;
      }
      if (solve_window(a, lo, m, p, out.value)) {
        out.degree_used = p;
        return out;
      }
    }

    // empty window: mean over the nearest max(2, degree + 1) points
    out.fallback = true;
    out.degree_used = 0;
    out.value = nearest_mean(a, std::max<std::size_t>(2, static_cast<std::size_t>(degree_) + 1));
    return out;
  }

private:
  using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
  using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;

  //! Normal equations on the basis ((z - a)/h)^j; the intercept is the
  //! estimate at a. Returns false when the moment matrix is numerically
  //! singular (condition estimate above 1e12).
  bool solve_window(double a, std::size_t lo, std::size_t m, int p,
                    double& value) const
  {
    const int q = p + 1;
    SmallVector moments = SmallVector::Zero(2 * p + 1);
    SmallVector rhs = SmallVector::Zero(q);
    for (std::size_t i = lo; i < lo + m; ++i) {
      const double s = (z_[i] - a) / h_;
      double pw = 1.0;
      for (int j = 0; j <= 2 * p; ++j) {
        moments(j) += pw;
        if (j <= p) rhs(j) += y_[i] * pw;
        pw *= s;
      }
    }
    SmallMatrix normal(q, q);
    for (int r = 0; r < q; ++r)
      for (int c = 0; c < q; ++c) normal(r, c) = moments(r + c);

    Eigen::JacobiSVD<SmallMatrix> svd(normal, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(q - 1);
    if (!(smin > 0.0) || smax / smin > 1e12) return false;
    const SmallVector coef = svd.solve(rhs);
    value = coef(0);
    return true;
  }

  double nearest_mean(double a, std::size_t want) const
  {
    const std::size_t take = std::min(want, z_.size());
    // two-pointer expansion outward from the insertion point
    std::size_t r = static_cast<std::size_t>(std::lower_bound(z_.begin(), z_.end(), a) - z_.begin());
    std::size_t l = r;
    double sum = 0.0;
    for (std::size_t picked = 0; picked < take; ++picked) {
      const bool left_ok = l > 0;
      const bool right_ok = r < z_.size();
      bool pick_left;
      if (left_ok && right_ok)
        pick_left = (a - z_[l - 1]) <= (z_[r] - a);
      else
        pick_left = left_ok;
      if (pick_left) {
        --l;
        sum += y_[l];
      } else {
        sum += y_[r];
        ++r;
      }
    }
    return sum / static_cast<double>(take);
  }

  std::vector<double> z_, y_; // sorted by z (y permuted alongside)
  int degree_ = 0;
  double h_ = 1.0;
  double dom_lo_ = 0.0;
  double dom_hi_ = 0.0;
};

inline LpeResult fit_predict(const LinkModel& model, double a)
{
  return model.fit_predict(a);
}

} // namespace sibandit
