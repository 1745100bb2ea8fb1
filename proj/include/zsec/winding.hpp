#ifndef ZSEC_WINDING_HPP
#define ZSEC_WINDING_HPP

#include <cmath>
#include <vector>

#include "zsec/types.hpp"

namespace zsec {

// Axis-aligned rectangle in the strip, s = sigma + i t.
struct Box {
  double sigma_lo = 0.0;
  double sigma_hi = 1.0;
  double t_lo = 0.0;
  double t_hi = 1.0;

  bool valid() const { return sigma_lo < sigma_hi && t_lo < t_hi; }
  cplx corner(int which) const {  // counterclockwise from lower-left
    switch (which & 3) {
      case 0: return {sigma_lo, t_lo};
      case 1: return {sigma_hi, t_lo};
      case 2: return {sigma_hi, t_hi};
      default: return {sigma_lo, t_hi};
    }
  }
};

// Zero count (with multiplicity) inside the rectangle by the argument
// principle: the winding number of F over the counterclockwise boundary.
// Phase is accumulated over adaptively subdivided segments; a segment is
// accepted only when its phase jump is below pi/2, which makes the integer
// winding unambiguous.  Near-vanishing boundary samples abort with a
// boundary-zero error (the caller perturbs the box); segments that refuse to
// settle abort with a phase-step error.
template <typename F>
int count_zeros_region(F&& f, const Box& box, int max_depth = 48) {
  require(box.valid(), "count_zeros_region: degenerate box");
  const double scale_hint =
      std::max({std::abs(box.sigma_lo), std::abs(box.sigma_hi),
                std::abs(box.t_lo), std::abs(box.t_hi), 1.0});
  (void)scale_hint;

  auto check_sample = [](const cplx& v) {
    if (!(std::abs(v) > 1e-280))
      throw boundary_zero_error(
          "count_zeros_region: |F| vanishes on the boundary");
    return v;
  };

  double total = 0.0;
  // Walk the four edges; each edge starts with a fixed 9-point subdivision,
  // then each segment is refined until the phase step is < pi/2.
  for (int e = 0; e < 4; ++e) {
    const cplx a = box.corner(e);
    const cplx b = box.corner(e + 1);
    struct Seg {
      cplx s0, f0, s1, f1;
      int depth;
    };
    std::vector<Seg> stack;
    const int kInitial = 8;
    std::vector<cplx> pts(kInitial + 1), vals(kInitial + 1);
    for (int i = 0; i <= kInitial; ++i) {
      const double u = static_cast<double>(i) / kInitial;
      pts[i] = a + u * (b - a);
      vals[i] = check_sample(f(pts[i]));
    }
    // Push in reverse so segments pop in forward order (determinism of the
    // accumulation order, though addition here is order-insensitive anyway).
    for (int i = kInitial - 1; i >= 0; --i)
      stack.push_back({pts[i], vals[i], pts[i + 1], vals[i + 1], 0});
    while (!stack.empty()) {
      const Seg seg = stack.back();
      stack.pop_back();
      const double dphi = std::arg(seg.f1 / seg.f0);
      if (std::abs(dphi) < kPi / 2.0) {
        total += dphi;
        continue;
      }
      if (seg.depth >= max_depth) {
        // A stubborn segment with a tiny sample pinpoints a boundary zero;
        // otherwise the function is pathological for this box.
        if (std::min(std::abs(seg.f0), std::abs(seg.f1)) < 1e-8)
          throw boundary_zero_error(
              "count_zeros_region: zero pinned on the boundary");
        throw phase_step_error(
            "count_zeros_region: phase step will not settle");
      }
      const cplx mid = 0.5 * (seg.s0 + seg.s1);
      const cplx fm = check_sample(f(mid));
      stack.push_back({mid, fm, seg.s1, seg.f1, seg.depth + 1});
      stack.push_back({seg.s0, seg.f0, mid, fm, seg.depth + 1});
    }
  }
  const double turns = total / kTwoPi;
  const long n = std::lround(turns);
  if (std::abs(turns - static_cast<double>(n)) > 0.25)
    throw phase_step_error(
        "count_zeros_region: winding did not close to an integer");
  return static_cast<int>(n);
}

}  // namespace zsec

#endif  // ZSEC_WINDING_HPP
