#ifndef ZSEC_THETA_HPP
#define ZSEC_THETA_HPP

#include <cmath>

#include "zsec/gamma.hpp"
#include "zsec/types.hpp"

namespace zsec {

// Riemann-Siegel theta: theta(t) = Im log Gamma(1/4 + i t/2) - (t/2) ln pi.
// On the critical line chi(1/2 + i t) = e^{-2 i theta(t)}.
inline double rs_theta(double t) {
  require(t > 0.0, "rs_theta: needs t > 0");
  return log_gamma(cplx(0.25, t / 2.0)).imag() - 0.5 * t * kLnPi;
}

// d theta / dt = Re psi(1/4 + i t/2) / 2 - (ln pi) / 2.
inline double rs_theta_deriv(double t) {
  require(t > 0.0, "rs_theta_deriv: needs t > 0");
  return 0.5 * digamma(cplx(0.25, t / 2.0)).real() - 0.5 * kLnPi;
}

}  // namespace zsec

#endif  // ZSEC_THETA_HPP
