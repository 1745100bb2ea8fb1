#ifndef ZSEC_TRACKER_HPP
#define ZSEC_TRACKER_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsec/atlas.hpp"
#include "zsec/rootfind.hpp"
#include "zsec/sections.hpp"
#include "zsec/winding.hpp"

namespace zsec {

// ===========================================================================
// Records and trajectories
// ===========================================================================

struct ZeroRecord {
  ComplexPoint location;
  bool on_line = true;
  double residual = 0.0;   // |F| at the location
  int newton_iters = 0;    // 0 for bisected on-line ordinates
};

enum class EventKind { departure, return_to_line };

inline const char* event_kind_name(EventKind k) {
  return k == EventKind::departure ? "departure" : "return";
}

struct CollisionEvent {
  int N = 0;
  double t_param = 0.0;
  ComplexPoint location;
  EventKind kind = EventKind::departure;
};

struct PairSample {
  int N = 0;
  double t_param = 0.0;
  bool on_line = true;
  // On-line: a is the lower ordinate.  Off-line: a is the sigma < 1/2 member
  // (the mirror), b the tracked sigma >= 1/2 member.
  ZeroRecord a, b;
};

struct PairTrajectory {
  int pair_lo = 0;
  int pair_hi = 0;
  Family family = Family::classical;
  std::vector<PairSample> samples;
  std::vector<CollisionEvent> events;

  bool ends_on_line() const {
    return samples.empty() || samples.back().on_line;
  }
};

// Tracking loss keeps the partial trajectory so a caller can resume from the
// last good (N, t_param) with smaller steps.
struct tracking_loss_error : error {
  tracking_loss_error(const std::string& msg, PairTrajectory partial_, int N_,
                      double tau_)
      : error("tracking loss at N=" + std::to_string(N_) +
              " t_param=" + std::to_string(tau_) + ": " + msg),
        partial(std::move(partial_)),
        N(N_),
        tau(tau_) {}
  PairTrajectory partial;
  int N = 0;
  double tau = 0.0;
};

struct TrackerConfig {
  double online_eps = 1e-6;           // |sigma - 1/2| on-line threshold
  double collision_eps_divisor = 20;  // collision_eps = spacing/divisor
  double tau_step = 0.125;            // default homotopy step
  int max_halvings = 8;               // adaptive step halvings per move
  int checkpoint_every = 10;          // winding verification cadence (stages)
  double box_sigma_margin = 0.05;     // strip box [margin, 1 - margin]
  Tolerance tol{};                    // Newton/bisection tolerance
};

// Natural ordinate scale at stage N, height t: the atlas ladder spacing at
// the effective index max(N, [t/2]).  For N below the good-approximation
// index this reproduces the mean zeta-zero spacing pi/theta'(t).
inline double local_spacing(int N, double t) {
  const long idx = std::max<long>({N, good_index(t), 1});
  return spacing(idx, 1);
}

// ===========================================================================
// Homotopy
// ===========================================================================

// One homotopy leg F_N + tau * B_{next}: linear in exactly one added term.
template <typename Engine>
struct Homotopy {
  Engine& eng;
  double tau = 0.0;

  cplx operator()(cplx s) const {
    return eng.eval(s) + tau * eng.term(eng.next_index(), s);
  }
  std::pair<cplx, cplx> value_and_deriv(cplx s) const {
    const auto [f, df] = eng.eval_with_deriv(s);
    const auto [g, dg] = eng.term_with_deriv(eng.next_index(), s);
    return {f + tau * g, df + tau * dg};
  }
  double line(double t) const {
    return eng.line_value(t) + tau * eng.term_line(eng.next_index(), t);
  }
};

// Spec-level operation: (1 - tau) F_N + tau F_{N+1} evaluated via the
// one-term form.  Builds a fresh engine; the tracker keeps persistent ones.
inline cplx homotopy_eval(const SectionSpec& spec, double t_param, cplx s) {
  require(t_param >= 0.0 && t_param <= 1.0,
          "homotopy_eval: t_param outside [0,1]");
  require(spec.valid(), "homotopy_eval: invalid spec");
  StagedSection eng(spec.family, spec.rearrangement);
  eng.advance_to(spec.n_terms);
  return Homotopy<StagedSection>{eng, t_param}(s);
}

// ===========================================================================
// On-line zero location
// ===========================================================================

namespace detail {

// Bisect a bracketed sign change of a real line function to x_tol.
template <typename LV>
ZeroRecord bisect_line_zero(LV&& lv, double lo, double hi, double x_tol) {
  const double root = bisect(lv, lo, hi, x_tol);
  ZeroRecord rec;
  rec.location = ComplexPoint(0.5, root);
  rec.on_line = true;
  rec.residual = std::abs(lv(root));
  rec.newton_iters = 0;
  return rec;
}

// Deterministic ternary search for the minimizer of |lv| on [lo, hi].
template <typename LV>
double dip_minimize(LV&& lv, double lo, double hi) {
  for (int iter = 0; iter < 90; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (std::abs(lv(m1)) <= std::abs(lv(m2))) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Scan [t_lo, t_hi] for zeros of a real line function: sign changes on the
// grid are bisected; grid dips without a sign change are refined by ternary
// search and split when the minimum turns out to cross zero (near-tangent
// pairs).  Returns records sorted by ordinate.
template <typename LV>
std::vector<ZeroRecord> locate_line_zeros(LV&& lv, double t_lo, double t_hi,
                                          double grid_step,
                                          double t_tol = 1e-10) {
  require(t_hi > t_lo, "locate_line_zeros: empty range");
  require(grid_step > 0.0, "locate_line_zeros: bad grid step");
  const int cells =
      std::max(2, static_cast<int>(std::ceil((t_hi - t_lo) / grid_step)));
  std::vector<double> ts(cells + 1), vs(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    ts[i] = t_lo + (t_hi - t_lo) * i / cells;
    vs[i] = lv(ts[i]);
  }
  std::vector<ZeroRecord> out;
  for (int i = 0; i < cells; ++i) {
    if (vs[i] == 0.0) {
      ZeroRecord rec;
      rec.location = ComplexPoint(0.5, ts[i]);
      out.push_back(rec);
      continue;
    }
    if (vs[i] * vs[i + 1] < 0.0) {
      out.push_back(detail::bisect_line_zero(lv, ts[i], ts[i + 1], t_tol));
      continue;
    }
    // Interior dip: |v| at i+1 smaller than both neighbors, all three the
    // same sign (a crossing pair may hide between the grid points).
    if (i + 2 <= cells && vs[i] * vs[i + 1] > 0.0 &&
        vs[i + 1] * vs[i + 2] > 0.0 && std::abs(vs[i + 1]) < std::abs(vs[i]) &&
        std::abs(vs[i + 1]) < std::abs(vs[i + 2])) {
      const double tm = detail::dip_minimize(lv, ts[i], ts[i + 2]);
      const double vm = lv(tm);
      if (vm != 0.0 && vm * vs[i] < 0.0) {
        out.push_back(detail::bisect_line_zero(lv, ts[i], tm, t_tol));
        out.push_back(detail::bisect_line_zero(lv, tm, ts[i + 2], t_tol));
      } else if (vm == 0.0) {
        ZeroRecord rec;
        rec.location = ComplexPoint(0.5, tm);
        out.push_back(rec);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ZeroRecord& x, const ZeroRecord& y) {
    return x.location.t < y.location.t;
  });
  // Collapse duplicates from overlapping dip splits.
  std::vector<ZeroRecord> dedup;
  for (const auto& r : out) {
    if (dedup.empty() ||
        std::abs(r.location.t - dedup.back().location.t) > 4.0 * t_tol)
      dedup.push_back(r);
  }
  return dedup;
}

// Spec-level operation: on-line zeros of a plain section over [t_lo, t_hi].
// Grid step is the tighter of the section ladder scale and the local
// zeta-ladder scale, divided by 8.
inline std::vector<ZeroRecord> locate_online_zeros(const SectionSpec& spec,
                                                   double t_lo, double t_hi) {
  require(spec.valid(), "locate_online_zeros: invalid spec");
  require(spec.family != Family::dh,
          "locate_online_zeros: dh uses its own engine wrapper");
  require(t_hi > t_lo && t_lo > 10.0,
          "locate_online_zeros: need t_hi > t_lo > 10");
  StagedSection eng(spec.family, spec.rearrangement);
  eng.advance_to(spec.n_terms);
  const double ladder = spacing(std::max(spec.n_terms, 1), 1);
  const double zeta_scale = kPi / rs_theta_deriv(t_hi);
  const double step = std::min(ladder, zeta_scale) / 8.0;
  return locate_line_zeros([&eng](double t) { return eng.line_value(t); },
                           t_lo, t_hi, step);
}

// ===========================================================================
// Newton refinement
// ===========================================================================

template <typename FD>
ZeroRecord refine_zero_fd(FD&& fd, cplx guess, const Tolerance& tol = {},
                          double online_eps = 1e-6) {
  const NewtonResult res = newton(fd, guess, tol);
  ZeroRecord rec;
  rec.location = ComplexPoint(res.z);
  rec.on_line = std::abs(rec.location.sigma - 0.5) <= online_eps;
  rec.residual = res.residual;
  rec.newton_iters = res.iters;
  return rec;
}

// Spec-level operation on a plain section.
inline ZeroRecord refine_zero(const SectionSpec& spec, ComplexPoint guess,
                              const Tolerance& tol = {},
                              double online_eps = 1e-6) {
  require(spec.valid(), "refine_zero: invalid spec");
  require(spec.family != Family::dh,
          "refine_zero: dh uses its own engine wrapper");
  StagedSection eng(spec.family, spec.rearrangement);
  eng.advance_to(spec.n_terms);
  return refine_zero_fd(
      [&eng](cplx s) { return eng.eval_with_deriv(s); }, guess.value(), tol,
      online_eps);
}

// ===========================================================================
// Collision intervals and the chaotic region
// ===========================================================================

struct CollisionIntervals {
  long chaotic_boundary = 0;  // collisions regulated only for N above this
  std::vector<FluctuationInterval> intervals;  // windows of length >= min_len
};

// Fluctuation windows filtered to a minimum regulation length (integers in
// the open-real window), and the chaotic boundary [scale t / (2 M0 pi)] for
// the deepest regulated M0.  `scale` adapts the window formula to families
// whose terms probe a different effective frequency (1 classical,
// 2 transformed, 4 for the Dirichlet control); scale multiplies t.
inline CollisionIntervals collision_intervals(double t, int min_len = 3,
                                              double scale = 1.0) {
  require(t > kTwoPi, "collision_intervals: need t > 2 pi");
  require(min_len >= 1, "collision_intervals: need min_len >= 1");
  require(scale >= 1.0, "collision_intervals: need scale >= 1");
  const auto all = fluctuation_intervals(scale * t, 1 << 24);
  CollisionIntervals out;
  long deepest_hi = all.empty() ? 0 : all.front().N_hi;
  bool found = false;
  for (const auto& iv : all) {
    if (iv.integer_count(t, scale) >= min_len) {
      out.intervals.push_back(iv);
      deepest_hi = iv.N_hi;
      found = true;
    }
  }
  // With no regulated window at all, the chaos extends over the full range.
  out.chaotic_boundary = found ? deepest_hi
                               : (all.empty() ? 0 : all.front().N_hi);
  return out;
}

// Per-family window scale: a transformed term of index n probes Dirichlet
// frequencies near n/2; the Dirichlet-control terms near n/4.
inline double collision_scale(Family f) {
  switch (f) {
    case Family::classical: return 1.0;
    case Family::accelerated: return 2.0;
    case Family::dh: return 4.0;
  }
  return 1.0;
}

// ===========================================================================
// Pair tracking
// ===========================================================================

namespace detail {

inline double collision_eps(int N, double t, const TrackerConfig& cfg) {
  return local_spacing(N, t) / cfg.collision_eps_divisor;
}

// Zero count in a box with a deterministic boundary-perturbation retry.
template <typename F>
int count_with_retry(F&& f, Box box, const TrackerConfig& cfg) {
  (void)cfg;
  const double h = box.t_hi - box.t_lo;
  for (int attempt = 0; attempt < 3; ++attempt) {
    try {
      return count_zeros_region(f, box);
    } catch (const boundary_zero_error&) {
      box.t_lo -= 0.07 * h;  // asymmetric so repeated hits don't re-align
      box.t_hi += 0.09 * h;
      box.sigma_lo -= 0.017;
      box.sigma_hi += 0.023;
    }
  }
  return count_zeros_region(f, box);  // final attempt propagates errors
}

// Count the zeros in the pair's bounding box.  Short sections have ladders
// denser than the asymptotic spacing, so the t edges shrink to midway
// toward any neighboring on-line zero found inside the nominal margin;
// boundary hits retry at staggered edge fractions.
template <typename Engine>
int pair_box_count(Engine& eng, bool online, double t_a, double t_b,
                   cplx rho, double sp) {
  const double tc_a = online ? t_a : rho.imag();
  const double tc_b = online ? t_b : rho.imag();
  const double m0 = 0.45 * sp;
  const auto zs =
      locate_line_zeros([&eng](double t) { return eng.line_value(t); },
                        tc_a - m0, tc_b + m0, sp / 32.0);
  // Nearest line zeros strictly below / above the pair.
  bool has_below = false, has_above = false;
  double below = 0.0, above = 0.0;
  const double own_eps = 1e-6;
  for (const auto& z : zs) {
    const double t = z.location.t;
    if (t < tc_a - own_eps && (!has_below || t > below)) {
      below = t;
      has_below = true;
    }
    if (t > tc_b + own_eps && (!has_above || t < above)) {
      above = t;
      has_above = true;
    }
  }
  const double sig_half =
      online ? 0.2 : std::max(0.2, rho.real() - 0.5 + 0.15);
  auto F = [&eng](cplx s) { return eng.eval(s); };
  for (int attempt = 0; attempt < 3; ++attempt) {
    // Edge placement fraction toward the neighbor (or margin scale).
    const double frac = attempt == 0 ? 0.5 : (attempt == 1 ? 0.42 : 0.58);
    const double scale = attempt == 0 ? 1.0 : (attempt == 1 ? 0.93 : 1.07);
    const double lo =
        has_below ? tc_a - frac * (tc_a - below) : tc_a - m0 * scale;
    const double hi =
        has_above ? tc_b + frac * (above - tc_b) : tc_b + m0 * scale;
    const double sh = sig_half * (attempt == 0 ? 1.0 : scale);
    Box box{0.5 - sh, 0.5 + sh, lo, hi};
    try {
      return count_zeros_region(F, box);
    } catch (const boundary_zero_error&) {
      if (attempt == 2) throw;
    }
  }
  return 2;  // unreachable
}

}  // namespace detail

struct TrackInput {
  int pair_lo = 1;  // ladder index n; the partner is n + 1
  Family family = Family::classical;
  int N_start = -1;  // default: family first index
  int N_end = 50;
  std::optional<Rearrangement> rearrangement;
  TrackerConfig cfg{};
  // Optional ladder override mapping a zero index to its predicted ordinate.
  // Engines whose zeros follow a different counting function (e.g. the
  // Davenport-Heilbronn family) supply their own prediction here; when empty
  // the zeta ladder fl_zero is used.
  std::function<double(int)> seed_prediction;
};

// Track the zero pair (n, n+1) of a section family through the term-by-term
// homotopy from N_start to N_end.  The engine must expose the StagedSection
// interface; the trajectory carries every accepted (N, t_param) sample and
// the departure/return events.
template <typename Engine>
PairTrajectory track_pair_engine(Engine& eng, const TrackInput& in) {
  const TrackerConfig& cfg = in.cfg;
  PairTrajectory traj;
  traj.pair_lo = in.pair_lo;
  traj.pair_hi = in.pair_lo + 1;
  traj.family = eng.family();

  const int first = family_first_index(eng.family());
  const int N_start = in.N_start < first ? first : in.N_start;
  require(in.N_end > N_start, "track_pair: empty stage range");
  eng.advance_to(N_start);

  // --- seed: atlas-guided refinement of the two initial on-line zeros ----
  auto seed_zero = [&](int idx) {
    const double t0 =
        in.seed_prediction ? in.seed_prediction(idx) : fl_zero(idx);
    const double half = 0.6 * kPi / rs_theta_deriv(t0);
    auto lv = [&eng](double t) { return eng.line_value(t); };
    const auto found =
        locate_line_zeros(lv, t0 - half, t0 + half, half / 8.0);
    if (found.empty())
      throw tracking_loss_error("no seed zero near atlas prediction", traj,
                                N_start, 0.0);
    // Nearest located zero to the prediction.
    const ZeroRecord* best = &found.front();
    for (const auto& r : found)
      if (std::abs(r.location.t - t0) < std::abs(best->location.t - t0))
        best = &r;
    return *best;
  };
  ZeroRecord za = seed_zero(in.pair_lo);
  ZeroRecord zb = seed_zero(in.pair_lo + 1);
  if (za.location.t > zb.location.t) std::swap(za, zb);
  if (std::abs(za.location.t - zb.location.t) < 1e-9)
    throw tracking_loss_error("seed zeros coincide", traj, N_start, 0.0);

  bool online = true;
  double t_a = za.location.t, t_b = zb.location.t;  // on-line state
  cplx rho;                                         // off-line state (sigma >= 1/2)
  traj.samples.push_back({N_start, 0.0, true, za, zb});

  auto record_online = [&](int N, double tau, double ta, double tb,
                           double ra, double rb) {
    ZeroRecord a, b;
    a.location = ComplexPoint(0.5, ta);
    b.location = ComplexPoint(0.5, tb);
    a.residual = ra;
    b.residual = rb;
    traj.samples.push_back({N, tau, true, a, b});
  };
  auto record_offline = [&](int N, double tau, const ZeroRecord& right) {
    ZeroRecord left = right;
    left.location = ComplexPoint(1.0 - right.location.sigma, right.location.t);
    PairSample smp{N, tau, false, left, right};
    smp.a.on_line = false;
    smp.b.on_line = false;
    traj.samples.push_back(smp);
  };

  // --- stage loop --------------------------------------------------------
  for (int N = N_start; N < in.N_end; ++N) {
    double tau = 0.0;
    double step = cfg.tau_step;
    const double t_mid_now = online ? 0.5 * (t_a + t_b) : rho.imag();
    const double sp = local_spacing(N, t_mid_now);
    const double ce = detail::collision_eps(N, t_mid_now, cfg);
    Homotopy<Engine> H{eng, 0.0};

    while (tau < 1.0) {
      const double tau_next = std::min(tau + step, 1.0);
      H.tau = tau_next;
      auto lv = [&H](double t) { return H.line(t); };

      if (online) {
        // Move both ordinates; windows of half-width sp/4 around previous.
        const double w = sp / 4.0;
        auto roots_near = [&](double center) {
          return locate_line_zeros(lv, center - w, center + w, w / 8.0);
        };
        const auto ra = roots_near(t_a);
        const auto rb = roots_near(t_b);
        auto nearest = [](const std::vector<ZeroRecord>& rs, double center,
                          double* out) {
          bool ok = false;
          double best = 0.0, bestd = 1e300;
          for (const auto& r : rs) {
            const double d = std::abs(r.location.t - center);
            if (d < bestd) {
              bestd = d;
              best = r.location.t;
              ok = true;
            }
          }
          if (ok) *out = best;
          return ok;
        };
        double na = 0.0, nb = 0.0;
        const bool got_a = nearest(ra, t_a, &na);
        const bool got_b = nearest(rb, t_b, &nb);
        const bool distinct = got_a && got_b && std::abs(nb - na) > 1e-9;

        if (distinct &&
            (std::abs(na - t_a) >= sp / 4.0 ||
             std::abs(nb - t_b) >= sp / 4.0) &&
            step > cfg.tau_step / (1 << cfg.max_halvings)) {
          step *= 0.5;  // too fast; retry the leg with a smaller step
          continue;
        }

        if (distinct && nb - na >= ce) {
          record_online(N, tau_next, na, nb, std::abs(lv(na)),
                        std::abs(lv(nb)));
          t_a = na;
          t_b = nb;
          tau = tau_next;
          continue;
        }

        // Close approach or lost bracket: re-scan the joint neighborhood at
        // collision resolution.
        const auto joint =
            locate_line_zeros(lv, std::min(t_a, t_b) - ce,
                              std::max(t_a, t_b) + ce, ce / 8.0);
        if (joint.size() >= 2) {
          // Still two on-line zeros (just close); keep tracking.
          const double ja = joint[0].location.t;
          const double jb = joint[1].location.t;
          record_online(N, tau_next, ja, jb, joint[0].residual,
                        joint[1].residual);
          t_a = ja;
          t_b = jb;
          tau = tau_next;
          continue;
        }

        // Sign-change pair has disappeared: confirm the count in a thin box.
        const double mid = 0.5 * (t_a + t_b);
        const double halfh = std::max(4.0 * ce, 2.0 * (t_b - t_a));
        Box thin{cfg.box_sigma_margin, 1.0 - cfg.box_sigma_margin,
                 mid - halfh, mid + halfh};
        const int count = detail::count_with_retry(H, thin, cfg);
        if (count != 2)
          throw tracking_loss_error(
              "thin-box count " + std::to_string(count) +
                  " at sign-pair disappearance",
              traj, N, tau_next);

        // Departure: bracketed between tau and tau_next, midpoint recorded.
        CollisionEvent ev;
        ev.N = N;
        ev.t_param = 0.5 * (tau + tau_next);
        ev.location = ComplexPoint(0.5, mid);
        ev.kind = EventKind::departure;
        traj.events.push_back(ev);

        // Seed the off-line representative (sigma >= 1/2).
        bool seeded = false;
        for (double d : {ce, 2.0 * ce, 4.0 * ce, 0.05, 0.1, 0.2}) {
          try {
            ZeroRecord rec = refine_zero_fd(
                [&H](cplx s) { return H.value_and_deriv(s); },
                cplx(0.5 + d, mid), cfg.tol, cfg.online_eps);
            cplx z = cplx(rec.location.sigma, rec.location.t);
            if (z.real() < 0.5) z = 1.0 - std::conj(z);
            if (z.real() - 0.5 > cfg.online_eps &&
                std::abs(z.imag() - mid) < 4.0 * halfh) {
              rho = z;
              rec.location = ComplexPoint(rho);
              rec.on_line = false;
              record_offline(N, tau_next, rec);
              seeded = true;
              break;
            }
          } catch (const convergence_error&) {
            // try the next seed offset
          }
        }
        if (!seeded)
          throw tracking_loss_error("no off-line seed converged", traj, N,
                                    tau_next);
        online = false;
        t_a = t_b = 0.0;
        tau = tau_next;
        continue;
      }

      // ----- off-line continuation ------------------------------------
      ZeroRecord rec;
      try {
        rec = refine_zero_fd([&H](cplx s) { return H.value_and_deriv(s); },
                             rho, cfg.tol, cfg.online_eps);
      } catch (const convergence_error&) {
        throw tracking_loss_error("off-line Newton lost the zero", traj, N,
                                  tau_next);
      }
      cplx z = cplx(rec.location.sigma, rec.location.t);
      if (z.real() < 0.5) z = 1.0 - std::conj(z);
      if (std::abs(z - rho) >= sp / 4.0 &&
          step > cfg.tau_step / (1 << cfg.max_halvings)) {
        step *= 0.5;
        continue;
      }

      if (z.real() - 0.5 <= cfg.online_eps) {
        // Candidate return: look for the reborn sign-change pair at
        // successively finer resolutions.
        const double center = z.imag();
        const double w = 2.0 * ce;
        std::vector<ZeroRecord> pair;
        for (double div : {16.0, 64.0, 256.0}) {
          pair = locate_line_zeros(lv, center - w, center + w, w / div);
          if (pair.size() >= 2) break;
        }
        if (pair.size() >= 2) {
          CollisionEvent ev;
          ev.N = N;
          ev.t_param = 0.5 * (tau + tau_next);
          ev.location = ComplexPoint(0.5, center);
          ev.kind = EventKind::return_to_line;
          traj.events.push_back(ev);
          // The two roots nearest the merge point are ours.
          std::sort(pair.begin(), pair.end(),
                    [center](const ZeroRecord& x, const ZeroRecord& y) {
                      return std::abs(x.location.t - center) <
                             std::abs(y.location.t - center);
                    });
          double ta = pair[0].location.t, tb = pair[1].location.t;
          if (ta > tb) std::swap(ta, tb);
          record_online(N, tau_next, ta, tb, std::abs(lv(ta)),
                        std::abs(lv(tb)));
          t_a = ta;
          t_b = tb;
          online = true;
          tau = tau_next;
          continue;
        }
        // Grazing the line without splitting: stay off-line.
      }
      rho = z;
      rec.location = ComplexPoint(rho);
      rec.on_line = false;
      record_offline(N, tau_next, rec);
      tau = tau_next;
    }

    eng.advance();  // prefix now ends at N + 1

    // Periodic count-conservation checkpoint.
    if (cfg.checkpoint_every > 0 &&
        (N + 1 - N_start) % cfg.checkpoint_every == 0) {
      const double tm = online ? 0.5 * (t_a + t_b) : rho.imag();
      const int count = detail::pair_box_count(
          eng, online, t_a, t_b, rho, local_spacing(N + 1, tm));
      if (count != 2)
        throw tracking_loss_error(
            "checkpoint count " + std::to_string(count), traj, N + 1, 0.0);
    }
  }
  return traj;
}

inline PairTrajectory track_pair(const TrackInput& in) {
  require(in.family != Family::dh,
          "track_pair: dh pairs are tracked by the dh module");
  StagedSection eng(in.family, in.rearrangement);
  return track_pair_engine(eng, in);
}

// ===========================================================================
// Step classification
// ===========================================================================

enum class StepClass { attracting, repelling, neutral };

inline const char* step_class_name(StepClass c) {
  switch (c) {
    case StepClass::attracting: return "attracting";
    case StepClass::repelling: return "repelling";
    case StepClass::neutral: return "neutral";
  }
  return "?";
}

namespace detail {

// Stage-entry sample of stage N: the (N, 0) seed for the first stage, else
// the (N-1, 1) sample (identical prefix).
inline const PairSample* stage_entry(const PairTrajectory& traj, int N) {
  for (const auto& s : traj.samples) {
    if (s.N == N && s.t_param == 0.0) return &s;
    if (s.N == N - 1 && s.t_param == 1.0) return &s;
  }
  return nullptr;
}

}  // namespace detail

// Compare the pair gap entering stage N with the gap entering stage N + 1:
// growth is repelling, shrinkage attracting, equality (1e-12) neutral.
inline StepClass classify_step(const PairTrajectory& traj, int N) {
  const PairSample* before = detail::stage_entry(traj, N);
  const PairSample* after = detail::stage_entry(traj, N + 1);
  require(before != nullptr && after != nullptr,
          "classify_step: stage not sampled");
  require(before->on_line && after->on_line,
          "classify_step: undefined across off-line spans");
  const double g0 = std::abs(before->b.location.t - before->a.location.t);
  const double g1 = std::abs(after->b.location.t - after->a.location.t);
  if (g1 > g0 + 1e-12) return StepClass::repelling;
  if (g1 < g0 - 1e-12) return StepClass::attracting;
  return StepClass::neutral;
}

}  // namespace zsec

#endif  // ZSEC_TRACKER_HPP
