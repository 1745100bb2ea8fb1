#ifndef ZSEC_LAMBERT_HPP
#define ZSEC_LAMBERT_HPP

#include <cmath>

#include "zsec/types.hpp"

namespace zsec {
namespace detail {

// Series about the branch point x = -1/e in p = +-sqrt(2(e x + 1)).
inline double lambert_branch_point_series(double p) {
  return -1.0 + p * (1.0 + p * (-1.0 / 3 + p * (11.0 / 72 +
                     p * (-43.0 / 540 + p * (769.0 / 17280)))));
}

}  // namespace detail

// Real Lambert W on branch 0 (x >= -1/e) or branch -1 (-1/e <= x < 0),
// refined by Halley iteration to |W e^W - x| <= 1e-13 relative.
inline double lambert_w(int branch, double x) {
  require(branch == 0 || branch == -1, "lambert_w: branch must be 0 or -1");
  const double min_x = -1.0 / kE;
  if (branch == 0) {
    require(x >= min_x, "lambert_w: branch 0 needs x >= -1/e");
    if (x == 0.0) return 0.0;
  } else {
    require(x >= min_x && x < 0.0, "lambert_w: branch -1 needs -1/e <= x < 0");
  }

  const double p2 = 2.0 * (kE * x + 1.0);
  double w;
  if (p2 <= 0.0) return -1.0;  // branch point (clamped against rounding)
  if (branch == 0) {
    if (x < -0.25) {
      w = detail::lambert_branch_point_series(std::sqrt(p2));
    } else if (x < 3.0) {
      w = std::log1p(x);  // uniform seed on [-1/4, 3); Halley does the rest
    } else {
      const double l1 = std::log(x);  // >= log 3, so l2/l1 is tame
      const double l2 = std::log(l1);
      w = l1 - l2 + l2 / l1;
    }
  } else {
    if (x < -0.25) {
      w = detail::lambert_branch_point_series(-std::sqrt(p2));
    } else {
      const double l1 = std::log(-x);
      const double l2 = std::log(-l1);
      w = l1 - l2 + l2 / l1;
    }
  }
  if (p2 < 1e-6) return w;  // series already at full double accuracy

  const double target = 1e-13 * std::max(std::abs(x), 1e-300);
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= target) return w;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    w -= f / denom;
  }
  throw convergence_error("lambert_w: Halley iteration failed to converge");
}

}  // namespace zsec

#endif  // ZSEC_LAMBERT_HPP
