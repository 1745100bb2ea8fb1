#ifndef ZSEC_ZETA_REF_HPP
#define ZSEC_ZETA_REF_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "zsec/binomial.hpp"
#include "zsec/theta.hpp"
#include "zsec/types.hpp"

namespace zsec {

// Reference zeta evaluator: Euler acceleration of the alternating eta
// series, eta(s) = sum_n 2^{-(n+1)} sum_k (-1)^k C(n,k) (k+1)^{-s}, then
// zeta = eta / (1 - 2^{1-s}).  Off the real axis the term magnitudes beat,
// with lulls many orders deep followed by revivals, until n ~ 1.5 |Im s|;
// only past that does genuine geometric decay set in.  A stop therefore
// requires both n to clear that regime and a sustained quiet run, with the
// quiet threshold floored at the row's own rounding noise (absolute accuracy
// bottoms out around 1e-13 near the critical line).
inline cplx zeta_reference(cplx s, const Tolerance& tol = {}) {
  require(tol.valid(), "zeta_reference: invalid tolerance");
  if (std::abs(s - cplx(1.0, 0.0)) < 1e-8)
    throw pole_error("zeta_reference: pole at s = 1");
  const cplx denom = 1.0 - std::exp((1.0 - s) * kLn2);
  if (std::abs(denom) < 1e-10)
    throw domain_error("zeta_reference: eta normalization vanishes");

  std::vector<cplx> c;  // c_k = (k+1)^{-s}
  c.reserve(1024);
  auto ensure = [&](int k_hi) {
    for (int k = static_cast<int>(c.size()); k <= k_hi; ++k)
      c.push_back(std::exp(-s * std::log(static_cast<double>(k + 1))));
  };

  cplx eta = 0.0;
  int quiet = 0;
  const int n_floor = static_cast<int>(1.6 * std::abs(s.imag())) + 80;
  for (int n = 0; n < tol.max_iter; ++n) {
    const auto win = detail::weight_window(n);
    ensure(win.k_hi);
    double w = win.w_lo;
    cplx term = 0.0;
    for (int k = win.k_lo; k <= win.k_hi; ++k) {
      term += (k & 1) ? -w * c[k] : w * c[k];
      w *= static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    eta += term;
    // Row rounding noise scales with the largest |(k+1)^{-s}| in the window.
    const double noise_scale =
        std::pow((s.real() < 0.0 ? win.k_hi : win.k_lo) + 1.0, -s.real());
    const double thr =
        std::max(tol.abs_eps / 10.0 + tol.rel_eps * std::abs(eta) / 10.0,
                 32.0 * std::numeric_limits<double>::epsilon() * noise_scale);
    if (std::abs(term) < thr) {
      if (++quiet >= 16 && n >= n_floor) return eta / denom;
    } else {
      quiet = 0;
    }
  }
  throw convergence_error("zeta_reference: series did not settle");
}

// Hardy-style real rotation Z(t) = e^{i theta(t)} F(1/2 + i t) for an
// evaluator F carrying the zeta functional equation; the rotated value must
// be real and the imaginary residue is asserted.
template <typename F>
double hardy_z(double t, F&& f) {
  require(t > 0.0, "hardy_z: needs t > 0");
  const cplx v = std::polar(1.0, rs_theta(t)) * f(cplx(0.5, t));
  if (std::abs(v.imag()) > 1e-8 * (1.0 + std::abs(v.real())))
    throw symmetry_error("hardy_z: rotated value is not real");
  return v.real();
}

}  // namespace zsec

#endif  // ZSEC_ZETA_REF_HPP
