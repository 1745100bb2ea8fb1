#ifndef ZSEC_REARRANGER_HPP
#define ZSEC_REARRANGER_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsec/sections.hpp"
#include "zsec/tracker.hpp"

namespace zsec {

// ===========================================================================
// Fixture rearrangements
// ===========================================================================

enum class PaperRearrangement { R_classical, R_accelerated };

// The two hard-coded repelling rearrangements.  Both are unions of interval
// reflections, so the generic reverse-intervals builder reproduces them
// exactly: the classical map reflects 14..27 (constant 41) and 86..170
// (constant 256) inside [1, 300]; the transformed map reflects 31..53
// (constant 84) and 178..326 (constant 504) inside [0, 326].
inline Rearrangement paper_rearrangement(PaperRearrangement which) {
  if (which == PaperRearrangement::R_classical)
    return Rearrangement::reverse_intervals(1, 300, {{14, 27}, {86, 170}});
  return Rearrangement::reverse_intervals(0, 326, {{31, 53}, {178, 326}});
}

// Generic builder (named per the experiment vocabulary): identity off the
// given disjoint intervals, n -> (lo + hi) - n inside each.
inline Rearrangement reverse_interval_rearrangement(
    int domain_lo, int domain_hi,
    const std::vector<std::pair<int, int>>& intervals) {
  return Rearrangement::reverse_intervals(domain_lo, domain_hi, intervals);
}

// ===========================================================================
// Avoidance experiments
// ===========================================================================

enum class Verdict { avoided, reduced, unchanged, worsened };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::avoided: return "avoided";
    case Verdict::reduced: return "reduced";
    case Verdict::unchanged: return "unchanged";
    case Verdict::worsened: return "worsened";
  }
  return "?";
}

// Pure function of the two event lists.
inline Verdict verdict_of(const std::vector<CollisionEvent>& baseline,
                          const std::vector<CollisionEvent>& rearranged) {
  if (rearranged.empty() && !baseline.empty()) return Verdict::avoided;
  if (rearranged.size() == baseline.size()) return Verdict::unchanged;
  return rearranged.size() < baseline.size() ? Verdict::reduced
                                             : Verdict::worsened;
}

struct AvoidanceReport {
  int pair_lo = 0;
  int pair_hi = 0;
  Family family = Family::classical;
  int N_max = 0;
  std::vector<CollisionEvent> baseline_events;
  std::vector<CollisionEvent> rearranged_events;
  Rearrangement rearrangement = Rearrangement::identity(0, 0);
  Verdict verdict = Verdict::unchanged;
  bool partial = false;  // a tracking loss interrupted one of the legs
  // Final b-member ordinates of the two legs (diagnostic; equal to 1e-10
  // when both legs complete, since the closure-stage term sets coincide).
  double baseline_final_t = 0.0;
  double rearranged_final_t = 0.0;
};

namespace detail {

struct TrackOutcome {
  std::vector<CollisionEvent> events;
  double final_t = 0.0;
  bool lost = false;
};

template <typename TrackFn>
TrackOutcome run_leg(TrackFn&& track, const TrackInput& in) {
  TrackOutcome out;
  try {
    const PairTrajectory traj = track(in);
    out.events = traj.events;
    if (!traj.samples.empty())
      out.final_t = traj.samples.back().b.location.t;
  } catch (const tracking_loss_error& e) {
    out.events = e.partial.events;
    if (!e.partial.samples.empty())
      out.final_t = e.partial.samples.back().b.location.t;
    out.lost = true;
  }
  return out;
}

}  // namespace detail

// Track the pair under identity order and under the rearrangement, both
// extended to the rearrangement's closure stage so the two final term sets
// coincide, and compile the comparison.  TrackFn maps TrackInput to
// PairTrajectory (track_pair for zeta families; the dh module passes its
// own).  A tracking loss in either leg marks the report partial instead of
// propagating.
template <typename TrackFn>
AvoidanceReport run_avoidance_experiment_with(
    TrackFn&& track, int pair_lo, Family family, int N_max,
    const Rearrangement& rearrangement, const TrackerConfig& cfg = {}) {
  AvoidanceReport rep;
  rep.pair_lo = pair_lo;
  rep.pair_hi = pair_lo + 1;
  rep.family = family;
  rep.N_max = N_max;
  rep.rearrangement = rearrangement;

  const int N_end = std::max(N_max, rearrangement.closure_at_least(N_max));

  TrackInput base;
  base.pair_lo = pair_lo;
  base.family = family;
  base.N_start = family_first_index(family);
  base.N_end = N_end;
  base.cfg = cfg;
  const auto b = detail::run_leg(track, base);

  TrackInput rear = base;
  rear.rearrangement = rearrangement;
  const auto r = detail::run_leg(track, rear);

  rep.baseline_events = b.events;
  rep.rearranged_events = r.events;
  rep.baseline_final_t = b.final_t;
  rep.rearranged_final_t = r.final_t;
  rep.partial = b.lost || r.lost;
  rep.verdict = verdict_of(b.events, r.events);
  return rep;
}

inline AvoidanceReport run_avoidance_experiment(
    int pair_lo, Family family, int N_max, const Rearrangement& rearrangement,
    const TrackerConfig& cfg = {}) {
  require(family != Family::dh,
          "run_avoidance_experiment: dh experiments run through the dh "
          "module's tracker");
  return run_avoidance_experiment_with(
      [](const TrackInput& in) { return track_pair(in); }, pair_lo, family,
      N_max, rearrangement, cfg);
}

// ===========================================================================
// Automatic search over interval reversals
// ===========================================================================

namespace detail {

// Candidate reversal intervals: the regulated windows from
// collision_intervals, merged within each baseline collision cycle's stage
// span.  Reversing a window that no collision touches cannot help, and the
// windows tile so finely that per-window subsets would exhaust the cap
// before covering one cycle.
inline std::vector<std::pair<int, int>> candidate_intervals(
    const std::vector<CollisionEvent>& baseline, double t_ref, Family family,
    int first_index, int N_max) {
  const auto ci = collision_intervals(t_ref, 3, collision_scale(family));
  // Collision cycle spans [departure N, return N] (open cycles run to N_max).
  std::vector<std::pair<int, int>> spans;
  for (size_t i = 0; i < baseline.size(); ++i) {
    if (baseline[i].kind != EventKind::departure) continue;
    const int lo = baseline[i].N;
    const int hi = (i + 1 < baseline.size() &&
                    baseline[i + 1].kind == EventKind::return_to_line)
                       ? baseline[i + 1].N
                       : N_max;
    spans.push_back({lo, hi});
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& span : spans) {
    long lo = -1, hi = -1;
    for (const auto& iv : ci.intervals) {
      // Window touches the cycle span (stage numbers, inclusive).
      if (iv.N_hi + 1 < span.first || iv.N_lo > span.second + 1) continue;
      if (lo < 0) {
        lo = iv.N_lo;
        hi = iv.N_hi;
      } else {
        lo = std::min(lo, iv.N_lo);
        hi = std::max(hi, iv.N_hi);
      }
    }
    if (lo < 0) {  // no predicted window: fall back to the observed span
      lo = span.first;
      hi = span.second;
    }
    // Keep the window's natural upper end even past N_max: reversals that
    // reach into the closure region are exactly how an open collision cycle
    // gets cancelled (the experiment extends both legs to the closure).
    lo = std::max<long>(lo, first_index);
    if (lo < hi) out.push_back({static_cast<int>(lo), static_cast<int>(hi)});
  }
  // Merge overlapping candidates (cycles sharing windows) and sort.
  std::sort(out.begin(), out.end());
  std::vector<std::pair<int, int>> merged;
  for (const auto& c : out) {
    if (!merged.empty() && c.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, c.second);
    else
      merged.push_back(c);
  }
  return merged;
}

}  // namespace detail

// Search interval-reversal rearrangements for one that avoids the pair's
// collisions: subsets of the candidate intervals are tried smallest-first
// (deterministic bitmask order within a size), capped at `subset_cap`
// experiments.  Returns the first avoiding report, else the best seen
// (fewest rearranged events, earliest tried on ties).
template <typename TrackFn>
AvoidanceReport auto_search_with(TrackFn&& track, int pair_lo, Family family,
                                 int N_max, const TrackerConfig& cfg = {},
                                 int subset_cap = 64) {
  require(subset_cap >= 1, "auto_search: subset cap must be positive");
  const int first = family_first_index(family);

  TrackInput base;
  base.pair_lo = pair_lo;
  base.family = family;
  base.N_start = first;
  base.N_end = N_max;
  base.cfg = cfg;
  const auto b = detail::run_leg(track, base);

  AvoidanceReport best;
  best.pair_lo = pair_lo;
  best.pair_hi = pair_lo + 1;
  best.family = family;
  best.N_max = N_max;
  best.baseline_events = b.events;
  best.rearranged_events = b.events;
  best.baseline_final_t = b.final_t;
  best.rearranged_final_t = b.final_t;
  best.rearrangement = Rearrangement::identity(first, N_max);
  best.partial = b.lost;
  best.verdict = Verdict::unchanged;
  if (b.events.empty()) return best;  // nothing to avoid

  const auto cands = detail::candidate_intervals(b.events, b.final_t, family,
                                                 first, N_max);
  const int k = static_cast<int>(cands.size());
  if (k == 0) return best;

  // Subsets ordered by size, then bitmask; the empty subset is the baseline.
  std::vector<unsigned> order;
  for (int size = 1; size <= k; ++size)
    for (unsigned mask = 1; mask < (1u << k); ++mask)
      if (__builtin_popcount(mask) == size) order.push_back(mask);

  int tried = 0;
  for (unsigned mask : order) {
    if (tried >= subset_cap) break;
    std::vector<std::pair<int, int>> pieces;
    int dom_hi = N_max;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) {
        pieces.push_back(cands[i]);
        dom_hi = std::max(dom_hi, cands[i].second);
      }
    const Rearrangement rr =
        reverse_interval_rearrangement(first, dom_hi, pieces);
    AvoidanceReport rep = run_avoidance_experiment_with(
        track, pair_lo, family, N_max, rr, cfg);
    ++tried;
    if (rep.verdict == Verdict::avoided && !rep.partial) return rep;
    const bool better =
        rep.rearranged_events.size() < best.rearranged_events.size();
    if (better) best = rep;
  }
  return best;  // search exhausted: best effort
}

inline AvoidanceReport auto_search(int pair_lo, Family family, int N_max,
                                   const TrackerConfig& cfg = {},
                                   int subset_cap = 64) {
  require(family != Family::dh,
          "auto_search: dh experiments run through the dh module's tracker");
  return auto_search_with([](const TrackInput& in) { return track_pair(in); },
                          pair_lo, family, N_max, cfg, subset_cap);
}

}  // namespace zsec

#endif  // ZSEC_REARRANGER_HPP
