#ifndef ZSEC_BINOMIAL_HPP
#define ZSEC_BINOMIAL_HPP

#include <algorithm>
#include <cmath>

#include "zsec/types.hpp"

namespace zsec {
namespace detail {

// Normalized binomial weights w_k = C(n,k) 2^{-(n+1)} restricted to the
// window around k = n/2 that carries all mass above ~1e-22 of the peak.
// Iterate ascending from (k_lo, w_lo) via w_{k+1} = w_k (n-k)/(k+1).
struct WeightWindow {
  int k_lo = 0;
  int k_hi = 0;
  double w_lo = 0.0;
};

inline WeightWindow weight_window(int n) {
  WeightWindow win;
  const int half = static_cast<int>(7.0 * std::sqrt(static_cast<double>(n))) + 2;
  const int mid = n / 2;
  win.k_lo = std::max(0, mid - half);
  win.k_hi = std::min(n, mid + half);
  if (win.k_lo == 0) {
    // exact start: 2^{-(n+1)}
    win.w_lo = std::ldexp(1.0, -(n + 1));
    return win;
  }
  double w = std::exp(std::lgamma(n + 1.0) - std::lgamma(mid + 1.0) -
                      std::lgamma(n - mid + 1.0) - (n + 1) * kLn2);
  for (int k = mid; k > win.k_lo; --k) {
    w *= static_cast<double>(k) / static_cast<double>(n - k + 1);
  }
  win.w_lo = w;
  return win;
}

}  // namespace detail
}  // namespace zsec

#endif  // ZSEC_BINOMIAL_HPP
