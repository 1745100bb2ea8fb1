#ifndef ZSEC_DH_HPP
#define ZSEC_DH_HPP

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "zsec/gamma.hpp"
#include "zsec/lambert.hpp"
#include "zsec/rearranger.hpp"
#include "zsec/sections.hpp"
#include "zsec/tracker.hpp"
#include "zsec/types.hpp"

namespace zsec {

// ===========================================================================
// Davenport-Heilbronn arithmetic: character mod 5 and the kappa mix
// ===========================================================================

// The mixing constant kappa = (sqrt(10 - 2 sqrt 5) - 2)/(sqrt 5 - 1), chosen
// so that the kappa-weighted combination of the two conjugate degree-4
// characters mod 5 satisfies a clean functional equation without an Euler
// product.
inline double dh_kappa() {
  static const double k =
      (std::sqrt(10.0 - 2.0 * std::sqrt(5.0)) - 2.0) / (std::sqrt(5.0) - 1.0);
  return k;
}

// The degree-4 Dirichlet character mod 5 with chi(2) = i:
// {chi(1..5)} = {1, i, -i, -1, 0}, extended 5-periodically.
inline cplx dh_character(long m) {
  require(m >= 1, "dh_character: m must be >= 1");
  switch (m % 5) {
    case 1: return cplx(1.0, 0.0);
    case 2: return cplx(0.0, 1.0);
    case 3: return cplx(0.0, -1.0);
    case 4: return cplx(-1.0, 0.0);
    default: return cplx(0.0, 0.0);
  }
}

// Coefficient of the mixed Dirichlet series:
//   c_m = [(1 - i kappa) chi(m) + (1 + i kappa) conj(chi(m))] / 2
//       = Re[(1 - i kappa) chi(m)],
// which is real with 5-periodic values {1, kappa, -kappa, -1, 0}.  The
// realness is what gives the completed sections below their Schwarz
// reflection symmetry and hence an exactly real critical-line profile.
inline double dh_coefficient(long m) {
  require(m >= 1, "dh_coefficient: m must be >= 1");
  const double k = dh_kappa();
  switch (m % 5) {
    case 1: return 1.0;
    case 2: return k;
    case 3: return -k;
    case 4: return -1.0;
    default: return 0.0;
  }
}

// Aggregate configuration mirroring the two definitions above.
struct DHConfig {
  double kappa = dh_kappa();
  std::array<cplx, 5> character_table = {
      dh_character(1), dh_character(2), dh_character(3), dh_character(4),
      dh_character(5)};
};

inline DHConfig dh_config() { return DHConfig{}; }

// ===========================================================================
// Accelerated terms and completed sections
// ===========================================================================

// Euler-accelerated term of the mixed series,
//   A~(n, s) = 2^{-(n+1)} sum_k C(n,k) c_{k+1} (k+1)^{-s},
// with the summand index shifted by one throughout (coefficient and power)
// so the k = 0 term is well defined, exactly as in the zeta-section family.
// Evaluated over the mass-carrying binomial window with the same ascending
// walk as the zeta acceleration; c_{k+1} multiplies each window weight.
inline cplx dh_a_term(int n, cplx s) {
  require(n >= 0, "dh_a_term: n must be >= 0");
  const auto win = detail::weight_window(n);
  double w = win.w_lo;
  cplx sum = 0.0;
  for (int k = win.k_lo; k <= win.k_hi; ++k) {
    const double c = dh_coefficient(k + 1);
    if (c != 0.0)
      sum += w * c * std::exp(-s * std::log(static_cast<double>(k + 1)));
    w *= static_cast<double>(n - k) / static_cast<double>(k + 1);
  }
  return sum;
}

// Completing factor G(s) = (pi/5)^{-s/2} Gamma((1+s)/2), in log space.
// Poles of the Gamma factor sit at s = -1, -3, -5, ...; log_gamma reports
// them as pole errors.
inline cplx dh_completion(cplx s) {
  const double ln_pi5 = std::log(kPi / 5.0);
  return std::exp(-0.5 * s * ln_pi5 + log_gamma(0.5 * (1.0 + s)));
}

// Logarithmic derivative G'(s)/G(s) = -ln(pi/5)/2 + psi((1+s)/2)/2.
inline cplx dh_completion_log_deriv(cplx s) {
  const double ln_pi5 = std::log(kPi / 5.0);
  return -0.5 * ln_pi5 + 0.5 * digamma(0.5 * (1.0 + s));
}

// Completed symmetrized section
//   xi~_N(s) = sum_{n=0}^{N} (1/2) [G(s) A~(n,s) + G(1-s) A~(n,1-s)].
// Each summand is invariant under s -> 1-s (the two halves swap), so the
// whole section satisfies xi~_N(s) = xi~_N(1-s) identically; and because
// the c_m are real it also satisfies the Schwarz reflection
// xi~_N(conj s) = conj(xi~_N(s)), making it exactly real on the critical
// line.  This is the direct, order-faithful reference evaluator; the staged
// engine below is the fast path and must agree with it.
inline cplx dh_xi_section(int N, cplx s) {
  require(N >= 0, "dh_xi_section: N must be >= 0");
  cplx direct = 0.0, mirrored = 0.0;
  for (int n = 0; n <= N; ++n) {
    direct += dh_a_term(n, s);
    mirrored += dh_a_term(n, 1.0 - s);
  }
  return 0.5 * (dh_completion(s) * direct +
                dh_completion(1.0 - s) * mirrored);
}

// ===========================================================================
// Initial zeros
// ===========================================================================

// Closed-form ordinate of the n-th critical-line zero of the stage-0
// section: t_n = 2 pi (n - 5/8) / W_0(5 e^{-1} (n - 5/8)).  Monotone
// increasing for n >= 1; the n = 0 argument falls outside the W_0 domain
// and raises the Lambert domain error.
inline double dh_zero(int n) {
  const double a = static_cast<double>(n) - 0.625;
  return kTwoPi * a / lambert_w(0, 5.0 * a / kE);
}

// ===========================================================================
// Staged engine
// ===========================================================================

// Incremental prefix engine for the completed sections, shaped exactly like
// the zeta-family StagedSection so the homotopy tracker consumes it through
// the same template.  The prefix collapses over the summand index:
//   sum_{n in P} A~(n, s) = sum_k aP(k) c_{k+1} (k+1)^{-s},
// and the engine accumulates the product aP(k) c_{k+1} directly (c is fixed
// per k), so one evaluation costs O(k_max) powers plus two Gamma factors
// regardless of prefix length, and full-range rearrangements reproduce the
// identity-order section exactly.
class DhStagedSection {
 public:
  explicit DhStagedSection(std::optional<Rearrangement> rear = {})
      : rear_(std::move(rear)) {
    next_pos_ = family_first_index(Family::dh);
  }

  Family family() const { return Family::dh; }

  int next_index() const { return rear_ ? (*rear_)(next_pos_) : next_pos_; }

  int stage() const { return next_pos_ - 1; }

  void advance() {
    add_index(next_index());
    ++next_pos_;
  }

  void advance_to(int N) {
    require(N >= stage(), "DhStagedSection: cannot rewind");
    while (stage() < N) advance();
  }

  // --- prefix evaluation ---------------------------------------------------

  cplx eval(cplx s) const {
    return 0.5 * (dh_completion(s) * collapsed(s) +
                  dh_completion(1.0 - s) * collapsed(1.0 - s));
  }

  std::pair<cplx, cplx> eval_with_deriv(cplx s) const {
    const auto [a, da] = collapsed_with_deriv(s);
    const auto [m, dm] = collapsed_with_deriv(1.0 - s);
    const cplx G = dh_completion(s);
    const cplx Gm = dh_completion(1.0 - s);
    const cplx g = dh_completion_log_deriv(s);
    const cplx gm = dh_completion_log_deriv(1.0 - s);
    const cplx f = 0.5 * (G * a + Gm * m);
    const cplx df = 0.5 * (G * (g * a + da) - Gm * (gm * m + dm));
    return {f, df};
  }

  // On s = 1/2 + it the mirrored half is the conjugate of the direct half
  // (real coefficients, real reflection point), so the section equals
  // Re[G(s) A(s)] exactly.
  double line_value(double t) const {
    const cplx s(0.5, t);
    return (dh_completion(s) * collapsed(s)).real();
  }

  // --- single terms (the homotopy's moving part) ---------------------------

  cplx term(int m, cplx s) const {
    return 0.5 * (dh_completion(s) * dh_a_term(m, s) +
                  dh_completion(1.0 - s) * dh_a_term(m, 1.0 - s));
  }

  std::pair<cplx, cplx> term_with_deriv(int m, cplx s) const {
    const auto [a, da] = a_term_with_deriv(m, s);
    const auto [mm, dmm] = a_term_with_deriv(m, 1.0 - s);
    const cplx G = dh_completion(s);
    const cplx Gm = dh_completion(1.0 - s);
    const cplx g = dh_completion_log_deriv(s);
    const cplx gm = dh_completion_log_deriv(1.0 - s);
    const cplx f = 0.5 * (G * a + Gm * mm);
    const cplx df = 0.5 * (G * (g * a + da) - Gm * (gm * mm + dmm));
    return {f, df};
  }

  double term_line(int m, double t) const {
    const cplx s(0.5, t);
    return (dh_completion(s) * dh_a_term(m, s)).real();
  }

 private:
  static std::pair<cplx, cplx> a_term_with_deriv(int n, cplx s) {
    require(n >= 0, "dh term: n must be >= 0");
    const auto win = detail::weight_window(n);
    double w = win.w_lo;
    cplx f = 0.0, df = 0.0;
    for (int k = win.k_lo; k <= win.k_hi; ++k) {
      const double c = dh_coefficient(k + 1);
      if (c != 0.0) {
        const double ln_k1 = std::log(static_cast<double>(k + 1));
        const cplx p = w * c * std::exp(-s * ln_k1);
        f += p;
        df -= ln_k1 * p;
      }
      w *= static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    return {f, df};
  }

  cplx collapsed(cplx s) const {
    cplx sum = 0.0;
    for (std::size_t k = 0; k < acc_.size(); ++k) {
      if (acc_[k] == 0.0) continue;
      sum += acc_[k] * std::exp(-s * std::log(static_cast<double>(k + 1)));
    }
    return sum;
  }

  std::pair<cplx, cplx> collapsed_with_deriv(cplx s) const {
    cplx f = 0.0, df = 0.0;
    for (std::size_t k = 0; k < acc_.size(); ++k) {
      if (acc_[k] == 0.0) continue;
      const double ln_k1 = std::log(static_cast<double>(k + 1));
      const cplx p = acc_[k] * std::exp(-s * ln_k1);
      f += p;
      df -= ln_k1 * p;
    }
    return {f, df};
  }

  void add_index(int n) {
    const auto win = detail::weight_window(n);
    if (static_cast<int>(acc_.size()) <= win.k_hi)
      acc_.resize(static_cast<std::size_t>(win.k_hi) + 1, 0.0);
    double w = win.w_lo;
    for (int k = win.k_lo; k <= win.k_hi; ++k) {
      acc_[static_cast<std::size_t>(k)] += w * dh_coefficient(k + 1);
      w *= static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
  }

  std::optional<Rearrangement> rear_;
  int next_pos_ = 0;
  std::vector<double> acc_;  // collapsed weights times coefficients, over k
};

// ===========================================================================
// Realness audit
// ===========================================================================

// Largest relative imaginary residue of the full complex evaluation on the
// critical line over an even sample grid.  The collapsed coefficients are
// real, so this measures only floating-point noise; the tracker relies on
// the real line profile and callers can assert the residue is tiny before
// trusting 1D on-line detection.
inline double dh_line_realness_residue(int N, double t_lo, double t_hi,
                                       int samples) {
  require(samples >= 2, "dh_line_realness_residue: need >= 2 samples");
  require(t_hi > t_lo, "dh_line_realness_residue: empty range");
  DhStagedSection eng;
  eng.advance_to(N);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t =
        t_lo + (t_hi - t_lo) * static_cast<double>(i) / (samples - 1);
    const cplx v = eng.eval(cplx(0.5, t));
    worst = std::max(worst, std::abs(v.imag()) / (1.0 + std::abs(v)));
  }
  return worst;
}

// ===========================================================================
// Tracking and experiments
// ===========================================================================

// Track a consecutive zero pair of the completed sections with the shared
// homotopy tracker, seeding from the closed-form ladder above.  The input's
// family must be dh; rearrangement and config are honored as in track_pair.
inline PairTrajectory dh_track_pair(TrackInput in) {
  require(in.family == Family::dh, "dh_track_pair: family must be dh");
  if (!in.seed_prediction)
    in.seed_prediction = [](int idx) { return dh_zero(idx); };
  DhStagedSection eng(in.rearrangement);
  return track_pair_engine(eng, in);
}

inline PairTrajectory dh_track_pair(int pair_lo, int N_end,
                                    std::optional<Rearrangement> rear = {},
                                    const TrackerConfig& cfg = {}) {
  TrackInput in;
  in.pair_lo = pair_lo;
  in.family = Family::dh;
  in.N_end = N_end;
  in.rearrangement = std::move(rear);
  in.cfg = cfg;
  return dh_track_pair(std::move(in));
}

// Avoidance experiment and reversal search over the dh tracker.
inline AvoidanceReport dh_run_avoidance_experiment(
    int pair_lo, int N_max, const Rearrangement& rearrangement,
    const TrackerConfig& cfg = {}) {
  return run_avoidance_experiment_with(
      [](const TrackInput& in) { return dh_track_pair(in); }, pair_lo,
      Family::dh, N_max, rearrangement, cfg);
}

inline AvoidanceReport dh_auto_search(int pair_lo, int N_max,
                                      const TrackerConfig& cfg = {},
                                      int subset_cap = 64) {
  return auto_search_with(
      [](const TrackInput& in) { return dh_track_pair(in); }, pair_lo,
      Family::dh, N_max, cfg, subset_cap);
}

}  // namespace zsec

#endif  // ZSEC_DH_HPP
