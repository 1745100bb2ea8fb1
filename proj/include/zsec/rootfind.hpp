#ifndef ZSEC_ROOTFIND_HPP
#define ZSEC_ROOTFIND_HPP

#include <cmath>
#include <utility>

#include "zsec/types.hpp"

namespace zsec {

// Bisection on a bracketing interval [lo, hi] with f(lo) f(hi) <= 0, to an
// absolute width tolerance in the argument.  Deterministic midpoint rule.
template <typename F>
double bisect(F&& f, double lo, double hi, double x_tol, int max_iter = 200) {
  require(lo <= hi, "bisect: inverted bracket");
  double flo = f(lo);
  const double fhi = f(hi);
  require(flo * fhi <= 0.0, "bisect: no sign change in bracket");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int iter = 0; iter < max_iter && hi - lo > x_tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if (flo * fmid < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return 0.5 * (lo + hi);
}

struct NewtonResult {
  cplx z;
  double residual = 0.0;
  int iters = 0;
};

// Newton iteration on an analytic function given by a joint value/derivative
// callable s -> (f, f').  Converges quadratically from inside the basin;
// throws outside (non-convergence or vanishing derivative).
//
// Convergence is judged by the Newton step |f / f'|, the residual measured
// in argument units: unlike a bare |f| threshold it is invariant under
// rescaling the function, which matters for completed sections whose
// Gamma-type prefactors are exponentially small in the ordinate.  On
// acceptance the final step is still taken and the residual re-evaluated at
// the returned point.
template <typename FD>
NewtonResult newton(FD&& fd, cplx guess, const Tolerance& tol = {},
                    int max_iter = 60) {
  cplx z = guess;
  for (int iter = 0; iter < max_iter; ++iter) {
    const auto [f, df] = fd(z);
    if (std::abs(f) == 0.0) return {z, 0.0, iter};
    if (std::abs(df) < 1e-300)
      throw convergence_error("newton: derivative vanished");
    const cplx step = f / df;
    if (std::abs(step) <= tol.abs_eps * (1.0 + std::abs(z))) {
      z -= step;  // final polish
      const auto [f2, df2] = fd(z);
      (void)df2;
      return {z, std::abs(f2), iter + 1};
    }
    z -= step;
    if (!(std::abs(z) < 1e12))
      throw convergence_error("newton: iterate escaped");
  }
  const auto [f, df] = fd(z);
  if (std::abs(df) >= 1e-300 &&
      std::abs(f / df) <= 16.0 * tol.abs_eps * (1.0 + std::abs(z)))
    return {z, std::abs(f), max_iter};  // grazing convergence
  throw convergence_error("newton: no convergence from the given guess");
}

}  // namespace zsec

#endif  // ZSEC_ROOTFIND_HPP
