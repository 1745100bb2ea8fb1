#ifndef ZSEC_ATLAS_HPP
#define ZSEC_ATLAS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "zsec/lambert.hpp"
#include "zsec/theta.hpp"
#include "zsec/types.hpp"
#include "zsec/zeta_ref.hpp"

namespace zsec {

// Closed-form predictions of zeros on the critical line: the 1 + chi ladder,
// per-term ladders of B_k, their spacing, Gram points, and the consistency
// checks tying them together.

struct AtlasZero {
  int k = 1;             // term index; k = 1 is the 1 + chi ladder
  int m = 0;             // zero index within the family
  double t_predicted = 0.0;
};

// ---------------------------------------------------------------------------
// The 1 + chi ladder
// ---------------------------------------------------------------------------

// t0_n = (8n - 11) pi / (4 W_0((8n - 11)/(8e))): the exact inverse of
// (t/2pi) ln(t/(2 pi e)) = n - 11/8.  For n = 1 both the numerator and the
// W value are negative, cancelling to the first positive ordinate ~14.5.
inline double fl_zero(int n) {
  require(n >= 1, "fl_zero: n must be >= 1");
  const double a = 8.0 * n - 11.0;
  const double w = lambert_w(0, a / (8.0 * kE));
  return a * kPi / (4.0 * w);
}

// ---------------------------------------------------------------------------
// Per-term ladders of B_k
// ---------------------------------------------------------------------------

// Piecewise ladder: the first k^2 zeros sit below the stationary height
// t* = 2 pi k^2 and come from branch -1; the rest (re-indexed by m - 2k^2)
// from branch 0.
inline double bk_zero(int k, int m) {
  require(k >= 1, "bk_zero: k must be >= 1");
  require(m >= 1, "bk_zero: m must be >= 1");
  const double kk = static_cast<double>(k) * k;
  if (m <= static_cast<long>(k) * k) {
    const double a = 5.0 - 8.0 * m;
    const double x = a / (8.0 * kk * kE);
    const double w = lambert_w(-1, x);
    return a * kPi / (4.0 * w);
  }
  const double a = 8.0 * (m - 2.0 * kk) - 3.0;
  const double x = a / (8.0 * kk * kE);
  const double w = lambert_w(0, x);
  return a * kPi / (4.0 * w);
}

// ---------------------------------------------------------------------------
// Alternative (Lambert-free) ladder description
// ---------------------------------------------------------------------------

struct BkAltJRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double j) const { return j >= lo && j <= hi; }
};

// Stated index window for the alternative description at cutoff N.
inline BkAltJRange bk_alt_j_range(int k, int N) {
  require(k >= 1 && N >= 1, "bk_alt_j_range: need k >= 1, N >= 1");
  const double ratio = N / (kPi * k * k);
  require(ratio > 1.0, "bk_alt_j_range: need N > pi k^2");
  BkAltJRange r;
  r.lo = (N / kPi) * std::log(ratio / kE) + 11.0 / 8.0;
  r.hi = r.lo + std::log(ratio) / kPi;
  return r;
}

// T~_j^k = (8N + 8 pi j - 11 pi) / (4 (ln N - ln(pi k^2))).  Diagnostic
// model only; values for j outside bk_alt_j_range are still returned.
inline double bk_zero_alt(int k, int N, int j) {
  require(k >= 1 && N >= 1, "bk_zero_alt: need k >= 1, N >= 1");
  const double denom = std::log(static_cast<double>(N)) -
                       std::log(kPi * k * k);
  require(denom > 0.0, "bk_zero_alt: need N > pi k^2");
  return (8.0 * N + 8.0 * kPi * j - 11.0 * kPi) / (4.0 * denom);
}

// Distance between consecutive ladder zeros at cutoff N.
inline double spacing(long N, int k) {
  require(N >= 1, "spacing: N must be >= 1");
  require(k >= 1, "spacing: k must be >= 1");
  const double denom = std::log(static_cast<double>(N)) -
                       std::log(kPi * static_cast<double>(k) * k);
  require(std::abs(denom) > 1e-12, "spacing: N at the singular cutoff");
  return std::abs(kTwoPi / denom);
}

// ---------------------------------------------------------------------------
// Gram points
// ---------------------------------------------------------------------------

// Seed (8n+1) pi / (4 W_0((8n+1)/(8e))), then solve theta(g) = pi n by
// safeguarded Newton to 1e-10.
inline double gram_point(int n) {
  require(n >= 0, "gram_point: n must be >= 0");
  const double a = 8.0 * n + 1.0;
  double g = a * kPi / (4.0 * lambert_w(0, a / (8.0 * kE)));
  const double target = kPi * n;
  // theta is strictly increasing here (theta' = (1/2) ln(t/2pi) > 0 for
  // t > 2pi, and every Gram seed is above 17.8), so bracket then Newton.
  double lo = g, hi = g;
  double step = 1.0;
  while (rs_theta(lo) > target) { lo -= step; step *= 2.0; }
  step = 1.0;
  while (rs_theta(hi) < target) { hi += step; step *= 2.0; }
  for (int iter = 0; iter < 80; ++iter) {
    const double f = rs_theta(g) - target;
    if (std::abs(f) < 1e-13 * (1.0 + std::abs(target))) break;
    const double gnext = g - f / rs_theta_deriv(g);
    if (gnext > lo && gnext < hi) {
      (f > 0.0 ? hi : lo) = g;
      g = gnext;
    } else {
      (f > 0.0 ? hi : lo) = g;
      g = 0.5 * (lo + hi);
    }
    if (hi - lo < 1e-12 * (1.0 + std::abs(g))) break;
  }
  if (std::abs(rs_theta(g) - target) > 1e-10)
    throw convergence_error("gram_point: refinement did not converge");
  return g;
}

struct GramLawResult {
  int n = 0;
  double g = 0.0;      // refined Gram point
  double z = 0.0;      // Hardy Z at g
  bool holds = false;  // (-1)^n Z(g_n) > 0
};

// The Gram-law sign test is about zeta itself, so it evaluates the reference
// series, not a section.
inline GramLawResult gram_law_check(int n) {
  GramLawResult r;
  r.n = n;
  r.g = gram_point(n);
  r.z = hardy_z(r.g, [](cplx s) { return zeta_reference(s); });
  const double signed_z = (n % 2 == 0) ? r.z : -r.z;
  r.holds = signed_z > 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Refined ladder zeros and interlacing
// ---------------------------------------------------------------------------

// Refine the zero of cos(theta(t)) (the rotated 1 + chi section) nearest to
// the predicted ordinate: theta crosses pi/2 + j pi exactly once per ladder
// step, so bisection on a half-spacing bracket is safe.
inline double refine_fl_zero(int n) {
  const double t0 = fl_zero(n);
  const double half = 0.5 * kPi / rs_theta_deriv(t0);
  double lo = t0 - half, hi = t0 + half;
  auto f = [](double t) { return std::cos(rs_theta(t)); };
  double flo = f(lo), fhi = f(hi);
  // Expand conservatively if the prediction is off-center (small n).
  for (int grow = 0; grow < 4 && flo * fhi > 0.0; ++grow) {
    lo -= 0.5 * half;
    hi += 0.5 * half;
    flo = f(lo);
    fhi = f(hi);
  }
  require(flo * fhi <= 0.0, "refine_fl_zero: no sign change near prediction");
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * (1.0 + hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (flo * fmid <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return 0.5 * (lo + hi);
}

struct InterlaceReport {
  bool ok = true;
  int first_violation = -1;          // index into the merged sequence
  std::string detail;                 // empty when ok
};

// Strict alternation of two sorted ladders after merging.  Violations are
// data, not errors.
inline InterlaceReport interlace_check(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  struct Tagged {
    double t;
    int who;
  };
  std::vector<Tagged> merged;
  merged.reserve(a.size() + b.size());
  for (double t : a) merged.push_back({t, 0});
  for (double t : b) merged.push_back({t, 1});
  std::sort(merged.begin(), merged.end(),
            [](const Tagged& x, const Tagged& y) { return x.t < y.t; });
  InterlaceReport rep;
  for (std::size_t i = 1; i < merged.size(); ++i) {
    if (merged[i].who == merged[i - 1].who) {
      rep.ok = false;
      rep.first_violation = static_cast<int>(i);
      rep.detail = "two consecutive entries from ladder " +
                   std::to_string(merged[i].who) + " near t = " +
                   std::to_string(merged[i].t);
      return rep;
    }
  }
  return rep;
}

// Alternation of refined 1 + chi zeros and Gram points over an index range.
// Ladder zero n sits at the theta level (n - 3/2) pi, i.e. between Gram
// points n-2 and n-1, so the Gram window is shifted accordingly and brackets
// the zero window on both sides.
inline InterlaceReport interlace_check(int n_lo, int n_hi) {
  require(2 <= n_lo && n_lo <= n_hi, "interlace_check: need 2 <= n_lo <= n_hi");
  std::vector<double> zeros, grams;
  for (int n = n_lo; n <= n_hi; ++n) zeros.push_back(refine_fl_zero(n));
  for (int m = n_lo - 2; m <= n_hi - 1; ++m) grams.push_back(gram_point(m));
  return interlace_check(zeros, grams);
}

// ---------------------------------------------------------------------------
// Index alignment
// ---------------------------------------------------------------------------

// Atlas index conventions differ between formulas; alignment to another
// ladder is by nearest ordinate, decided once and stored by the caller.
inline std::vector<int> align_indices(const std::vector<double>& from,
                                      const std::vector<double>& to) {
  require(!to.empty(), "align_indices: empty target ladder");
  std::vector<int> order(to.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&to](int a, int b) { return to[a] < to[b]; });
  std::vector<int> map;
  map.reserve(from.size());
  for (double t : from) {
    const auto it = std::lower_bound(
        order.begin(), order.end(), t,
        [&to](int idx, double val) { return to[idx] < val; });
    int best;
    if (it == order.begin()) {
      best = *it;
    } else if (it == order.end()) {
      best = *(it - 1);
    } else {
      best = (t - to[*(it - 1)] <= to[*it] - t) ? *(it - 1) : *it;
    }
    map.push_back(best);
  }
  return map;
}

}  // namespace zsec

#endif  // ZSEC_ATLAS_HPP
