#ifndef ZSEC_CHI_HPP
#define ZSEC_CHI_HPP

#include <cmath>
#include <complex>

#include "zsec/gamma.hpp"
#include "zsec/types.hpp"

namespace zsec {
namespace detail {

// log sin(w) for Im w >= 0, stable for large heights (branch matters only
// mod 2 pi i; every caller feeds the result through exp).
inline cplx log_sin(cplx w) {
  if (w.imag() <= 30.0) return std::log(std::sin(w));
  // sin w = e^{-iw} (e^{2iw} - 1) / (2i), |e^{2iw}| = e^{-2 Im w} tiny.
  const cplx i(0.0, 1.0);
  return -i * w + cplx(0.0, kPi / 2) - kLn2 +
         std::log(1.0 - std::exp(2.0 * i * w));
}

// cot(w) for any height, stable as Im w -> +-inf.
inline cplx cot(cplx w) {
  if (std::abs(w.imag()) <= 20.0) return std::cos(w) / std::sin(w);
  const cplx i(0.0, 1.0);
  if (w.imag() > 0.0) {
    const cplx q = std::exp(2.0 * i * w);  // tiny
    return -i * (1.0 + q) / (1.0 - q);
  }
  const cplx q = std::exp(-2.0 * i * w);
  return i * (1.0 + q) / (1.0 - q);
}

// Points where a factor of chi is singular or vanishes exactly: positive
// integers (Gamma(1-s) poles, partly cancelled) and non-positive even
// integers (sin zeros).  Rejected rather than filled in by limits.
inline bool chi_undefined_point(cplx s) {
  if (s.imag() != 0.0) return false;
  const double re = s.real();
  if (re != std::floor(re)) return false;
  const long n = static_cast<long>(re);
  return n >= 1 || (n <= 0 && n % 2 == 0);
}

}  // namespace detail

// chi(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1 - s), the factor in the
// functional equation zeta(s) = chi(s) zeta(1-s).  Evaluated in log space.
inline cplx chi(cplx s) {
  if (s.imag() < 0.0) return std::conj(chi(std::conj(s)));
  if (detail::chi_undefined_point(s))
    throw pole_error("chi: undefined at integer point of the factor product");
  const cplx lg = s * kLn2 + (s - 1.0) * kLnPi +
                  detail::log_sin(kPi * s / 2.0) + log_gamma(1.0 - s);
  if (lg.real() > 700.0)
    throw overflow_error("chi: log-magnitude exceeds double range");
  return std::exp(lg);
}

// Logarithmic derivative chi'(s)/chi(s).
inline cplx chi_log_deriv(cplx s) {
  if (detail::chi_undefined_point(s))
    throw pole_error("chi_log_deriv: undefined at integer point");
  return kLn2 + kLnPi + (kPi / 2.0) * detail::cot(kPi * s / 2.0) -
         digamma(1.0 - s);
}

// Asymptotic form (2 pi / t)^{sigma + i t - 1/2} e^{i (t + pi/4)},
// valid for t > 2 pi with an O(1/t) relative band.
inline cplx chi_asymptotic(double sigma, double t) {
  require(t > kTwoPi, "chi_asymptotic: needs t > 2 pi");
  const double l = std::log(kTwoPi / t);
  const cplx expo = cplx(sigma - 0.5, t) * l + cplx(0.0, t + kPi / 4);
  return std::exp(expo);
}

}  // namespace zsec

#endif  // ZSEC_CHI_HPP
