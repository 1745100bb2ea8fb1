#ifndef ZSEC_GAMMA_HPP
#define ZSEC_GAMMA_HPP

#include <cmath>
#include <complex>

#include "zsec/types.hpp"

namespace zsec {
namespace detail {

inline bool is_nonpositive_integer(cplx s) {
  return s.imag() == 0.0 && s.real() <= 0.0 &&
         s.real() == std::floor(s.real());
}

// Stirling series for ln Gamma; accurate for |z| >= 12 with Re z >= 2.
inline cplx stirling_log_gamma(cplx z) {
  // B_{2n} / (2n (2n-1))
  static constexpr double c[8] = {
      1.0 / 12,        -1.0 / 360,  1.0 / 1260, -1.0 / 1680,
      1.0 / 1188, -691.0 / 360360,  1.0 / 156,  -3617.0 / 122400};
  const cplx w = 1.0 / z;
  const cplx w2 = w * w;
  cplx p = w;
  cplx sum = 0.0;
  for (double ci : c) {
    sum += ci * p;
    p *= w2;
  }
  return (z - 0.5) * std::log(z) - z + kLnSqrt2Pi + sum;
}

// Lanczos (g = 7, 9 coefficients), log form; use with Re z >= 2 and
// 0 <= Im z <= 12, where the rational sum stays in the right half plane.
inline cplx lanczos_log_gamma(cplx z) {
  static constexpr double p[9] = {
      0.99999999999980993,     676.5203681218851,    -1259.1392167224028,
      771.32342877765313,     -176.61502916214059,      12.507343278686905,
      -0.13857109526572012,      9.9843695780195716e-6,  1.5056327351493116e-7};
  const cplx w = z - 1.0;
  cplx x = p[0];
  for (int i = 1; i < 9; ++i) x += p[i] / (w + cplx(i, 0));
  const cplx tt = w + 7.5;
  return kLnSqrt2Pi + (w + 0.5) * std::log(tt) - tt + std::log(x);
}

}  // namespace detail

// Principal branch of log Gamma (continuous continuation from the positive
// real axis; imaginary part is not reduced mod 2 pi).  Convergent rational
// core for moderate heights, Stirling asymptotics for tall arguments, with
// Gamma(s+1) = s Gamma(s) used to shift the argument into range.
inline cplx log_gamma(cplx s) {
  if (detail::is_nonpositive_integer(s))
    throw pole_error("log_gamma: pole at non-positive integer");
  if (s.imag() < 0.0) return std::conj(log_gamma(std::conj(s)));

  cplx shift = 0.0;
  if (s.imag() > 12.0) {
    while (s.real() < 2.0) {
      shift += std::log(s);
      s += 1.0;
    }
    return detail::stirling_log_gamma(s) - shift;
  }
  while (s.real() < 2.0) {
    shift += std::log(s);
    s += 1.0;
  }
  return detail::lanczos_log_gamma(s) - shift;
}

// Digamma psi(s); same shift-then-asymptotic scheme as log_gamma.
inline cplx digamma(cplx s) {
  if (detail::is_nonpositive_integer(s))
    throw pole_error("digamma: pole at non-positive integer");
  if (s.imag() < 0.0) return std::conj(digamma(std::conj(s)));

  // B_{2n} / (2n)
  static constexpr double d[8] = {
      1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240,
      1.0 / 132, -691.0 / 32760, 1.0 / 12, -3617.0 / 8160};
  cplx shift = 0.0;
  while (std::abs(s) < 12.0 || s.real() < 2.0) {
    shift += 1.0 / s;
    s += 1.0;
  }
  const cplx w2 = 1.0 / (s * s);
  cplx p = w2;
  cplx sum = 0.0;
  for (double di : d) {
    sum += di * p;
    p *= w2;
  }
  return std::log(s) - 0.5 / s - sum - shift;
}

}  // namespace zsec

#endif  // ZSEC_GAMMA_HPP
