#ifndef ZSEC_CLI_HPP
#define ZSEC_CLI_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zsec/atlas.hpp"
#include "zsec/config.hpp"
#include "zsec/dh.hpp"
#include "zsec/io.hpp"
#include "zsec/rearranger.hpp"
#include "zsec/sections.hpp"
#include "zsec/tracker.hpp"
#include "zsec/types.hpp"
#include "zsec/winding.hpp"
#include "zsec/zeta_ref.hpp"

namespace zsec::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPartial = 2;

// ===========================================================================
// Worker pool
// ===========================================================================

// Run fn(i) for i in [0, count) on up to `workers` threads.  Items must be
// independent; callers collect results into preallocated slots indexed by i,
// so output order never depends on scheduling.  Exceptions are rethrown on
// the calling thread (first one wins).
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ===========================================================================
// Tracking with loss recovery
// ===========================================================================

struct TrackRun {
  PairTrajectory traj;
  bool partial = false;
  std::string loss_message;
};

inline PairTrajectory dispatch_track(const TrackInput& in) {
  return in.family == Family::dh ? dh_track_pair(in) : track_pair(in);
}

// A tracking loss is recoverable: the pair restarts with the homotopy step
// halved (and more adaptive halvings allowed), which replays through the
// last good (N, t_param) and continues past it under the finer policy.
// After `retries` restarts the longest partial trajectory is returned as-is.
// A retry that fails harder than the loss it was retrying (for example the
// continued zero escaping to where the functional-equation factor overflows)
// falls back to that partial instead of surfacing the worse failure; only a
// first-attempt hard error propagates.
inline TrackRun track_with_retry(TrackInput in, int retries = 2) {
  std::optional<TrackRun> best_partial;
  for (int attempt = 0;; ++attempt) {
    try {
      return {dispatch_track(in), false, {}};
    } catch (const tracking_loss_error& e) {
      if (!best_partial ||
          e.partial.samples.size() > best_partial->traj.samples.size()) {
        best_partial = TrackRun{e.partial, true, e.what()};
      }
      if (attempt >= retries) return *best_partial;
      in.cfg.tau_step *= 0.5;
      in.cfg.max_halvings += 2;
    } catch (const std::exception&) {
      if (!best_partial) throw;
      return *best_partial;
    }
  }
}

// ===========================================================================
// Shared plumbing
// ===========================================================================

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

inline TrackInput make_track_input(int pair_lo, Family family, int N_max,
                                   const std::optional<Rearrangement>& rear,
                                   const RunConfig& cfg) {
  TrackInput in;
  in.pair_lo = pair_lo;
  in.family = family;
  in.N_end = N_max;
  in.rearrangement = rear;
  in.cfg = cfg.tracker();
  return in;
}

// Closure-aware end stage: tracking a rearranged pair must run the homotopy
// at least to the stage where the rearranged and identity term sets coincide
// again, otherwise the final comparison is between different sums.
inline int closure_end(int N_max, const std::optional<Rearrangement>& rear) {
  if (!rear) return N_max;
  return std::max(N_max, rear->closure_at_least(N_max));
}

inline void write_track_outputs(const RunConfig& cfg, const std::string& base,
                                const TrackRun& run,
                                const std::string& command_line) {
  write_file(out_path(cfg, base + ".csv"), [&](std::ostream& os) {
    write_trajectory_csv(os, run.traj, command_line,
                         run.partial ? run.loss_message : std::string{});
  });
  write_file(out_path(cfg, base + ".events.json"), [&](std::ostream& os) {
    write_events_json(os, run.traj);
  });
}

// ===========================================================================
// track / dh-track
// ===========================================================================

inline int cmd_track(int pair_lo, Family family, int N_max,
                     const std::optional<std::string>& rearrangement_path,
                     const RunConfig& cfg, const std::string& command_line) {
  std::optional<Rearrangement> rear;
  if (rearrangement_path) rear = load_rearrangement(*rearrangement_path);
  TrackInput in =
      make_track_input(pair_lo, family, closure_end(N_max, rear), rear, cfg);
  const TrackRun run = track_with_retry(in);
  const std::string base = "track_" + std::string(family_name(family)) + "_" +
                           std::to_string(pair_lo) + "_" +
                           std::to_string(pair_lo + 1);
  write_track_outputs(cfg, base, run, command_line);
  return run.partial ? kExitPartial : kExitOk;
}

// ===========================================================================
// scan
// ===========================================================================

namespace detail {

// DH ladder index bracketing an ordinate, for the line-scan grid step.
inline double dh_scan_step(double t_hi) {
  int n = 1;
  while (dh_zero(n) < t_hi && n < (1 << 22)) n *= 2;
  int lo = std::max(1, n / 2), hi = n;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (dh_zero(mid) < t_hi ? lo : hi) = mid;
  }
  return (dh_zero(lo + 1) - dh_zero(lo)) / 8.0;
}

}  // namespace detail

// Scan [t_lo, t_hi]: dump the on-line zeros of the stage-N section, then
// count zeros per unit box of the critical strip by the argument principle;
// the discrepancy column (winding minus on-line) flags off-line zeros.  An
// empty range produces header-only CSVs.
inline int cmd_scan(double t_lo, double t_hi, Family family, int N,
                    const RunConfig& cfg, const std::string& command_line) {
  require(t_hi >= t_lo, "scan: t_hi must be >= t_lo");
  require(N >= family_first_index(family), "scan: N below the family start");

  std::vector<ZeroRecord> zeros;
  std::vector<BoxScanRow> boxes;
  if (t_hi > t_lo) {
    // --- on-line zeros ---
    if (family == Family::dh) {
      DhStagedSection eng{};
      eng.advance_to(N);
      const double step = detail::dh_scan_step(t_hi);
      zeros = locate_line_zeros([&eng](double t) { return eng.line_value(t); },
                                t_lo, t_hi, step);
    } else {
      SectionSpec spec{family, N, std::nullopt};
      // The line locator's contract is strictly above t = 10; a scan that
      // starts exactly at the boundary is nudged just inside it.
      const double lo = t_lo == 10.0 ? std::nextafter(10.0, 11.0) : t_lo;
      zeros = locate_online_zeros(spec, lo, t_hi);
    }

    // --- unit boxes, integer-aligned and clipped to the scan range ---
    std::vector<std::pair<double, double>> edges;
    double a = t_lo;
    while (a < t_hi) {
      const double b = std::min(t_hi, std::floor(a) + 1.0 > a
                                          ? std::floor(a) + 1.0
                                          : a + 1.0);
      edges.emplace_back(a, b);
      a = b;
    }
    boxes.resize(edges.size());
    parallel_for(edges.size(), cfg.worker_count, [&](std::size_t i) {
      BoxScanRow row;
      row.t_lo = edges[i].first;
      row.t_hi = edges[i].second;
      const auto count_in = [&](const Box& box) {
        if (family == Family::dh) {
          DhStagedSection eng{};
          eng.advance_to(N);
          return count_zeros_region([&eng](cplx s) { return eng.eval(s); },
                                    box);
        }
        StagedSection eng(family, std::nullopt);
        eng.advance_to(N);
        return count_zeros_region([&eng](cplx s) { return eng.eval(s); }, box);
      };
      const double margin = cfg.tracker().box_sigma_margin;
      Box box{margin, 1.0 - margin, row.t_lo, row.t_hi};
      try {
        row.winding_count = count_in(box);
      } catch (const boundary_zero_error&) {
        // A zero pinned on the shared edge: nudge both ordinate walls by a
        // fixed offset (deterministic) and recount.
        Box nudged{margin, 1.0 - margin, row.t_lo - 1e-4, row.t_hi - 1e-4};
        row.winding_count = count_in(nudged);
      }
      for (const ZeroRecord& z : zeros)
        if (z.location.t >= row.t_lo && z.location.t < row.t_hi)
          ++row.online_count;
      row.discrepancy = row.winding_count - row.online_count;
      boxes[i] = row;
    });
  }

  const std::string tag = std::string(family_name(family)) + "_N" +
                          std::to_string(N);
  write_file(out_path(cfg, "scan_zeros_" + tag + ".csv"),
             [&](std::ostream& os) {
               write_zero_scan_csv(os, family, N, zeros, command_line);
             });
  write_file(out_path(cfg, "scan_boxes_" + tag + ".csv"),
             [&](std::ostream& os) {
               write_box_scan_csv(os, family, N, boxes, command_line);
             });
  return kExitOk;
}

// ===========================================================================
// atlas
// ===========================================================================

namespace detail {

// Refine a predicted ladder ordinate against an actual line function by
// expanding a bracket around the prediction until the sign changes, then
// bisecting.  gap is the local ladder spacing.
template <typename LV>
double refine_near(LV&& lv, double t0, double gap) {
  double half = 0.45 * gap;
  for (int grow = 0; grow < 5; ++grow) {
    const double lo = t0 - half, hi = t0 + half;
    if (lo > 0.0 && lv(lo) * lv(hi) <= 0.0)
      return bisect(lv, lo, hi, 1e-12);
    half *= 1.6;
  }
  throw convergence_error("atlas: no sign change near the predicted ordinate");
}

}  // namespace detail

// Ladder dump: predictions, refined ordinates and line residuals for zero
// indices m in [m_lo, m_hi].  Classical family: k = 1 is the 1 + chi ladder,
// k >= 2 the k-th term ladder.  DH family: its own ladder (k ignored,
// reported as 0) refined against the stage-0 line value.
inline int cmd_atlas(Family family, int k, int m_lo, int m_hi,
                     const RunConfig& cfg, const std::string& command_line) {
  require(m_lo <= m_hi, "atlas: empty index range");
  std::vector<LadderRow> rows(m_hi - m_lo + 1);
  if (family == Family::dh) {
    DhStagedSection eng{};  // stage 0
    parallel_for(rows.size(), cfg.worker_count, [&](std::size_t i) {
      const int m = m_lo + static_cast<int>(i);
      LadderRow r;
      r.k = 0;
      r.index = m;
      r.t_predicted = dh_zero(m);
      const double gap = (m >= 2 ? dh_zero(m) - dh_zero(m - 1)
                                 : dh_zero(m + 1) - dh_zero(m));
      const auto lv = [&eng](double t) { return eng.line_value(t); };
      r.t_refined = detail::refine_near(lv, r.t_predicted, gap);
      r.residual = std::abs(lv(r.t_refined));
      rows[i] = r;
    });
  } else {
    require(family == Family::classical,
            "atlas: ladders are defined for the classical terms and dh");
    require(k >= 1, "atlas: k must be >= 1");
    parallel_for(rows.size(), cfg.worker_count, [&](std::size_t i) {
      const int m = m_lo + static_cast<int>(i);
      LadderRow r;
      r.k = k;
      r.index = m;
      if (k == 1) {
        r.t_predicted = fl_zero(m);
        r.t_refined = refine_fl_zero(m);
        r.residual = std::abs(std::cos(rs_theta(r.t_refined)));
      } else {
        r.t_predicted = bk_zero(k, m);
        const double gap = bk_zero(k, m + 1) - bk_zero(k, m);
        StagedSection eng(Family::classical, std::nullopt);
        eng.advance_to(k);
        const auto lv = [&eng, k](double t) { return eng.term_line(k, t); };
        r.t_refined = detail::refine_near(lv, r.t_predicted, gap);
        r.residual = std::abs(lv(r.t_refined));
      }
      rows[i] = r;
    });
  }
  const std::string name = "atlas_" + std::string(family_name(family)) + "_k" +
                           std::to_string(family == Family::dh ? 0 : k) + "_" +
                           std::to_string(m_lo) + "_" + std::to_string(m_hi) +
                           ".csv";
  write_file(out_path(cfg, name), [&](std::ostream& os) {
    write_ladder_csv(os, family, rows, command_line);
  });
  return kExitOk;
}

// ===========================================================================
// gram
// ===========================================================================

inline int cmd_gram(int n_lo, int n_hi, const RunConfig& cfg,
                    const std::string& command_line) {
  require(0 <= n_lo && n_lo <= n_hi, "gram: bad index range");
  std::vector<GramLawResult> rows(n_hi - n_lo + 1);
  parallel_for(rows.size(), cfg.worker_count, [&](std::size_t i) {
    rows[i] = gram_law_check(n_lo + static_cast<int>(i));
  });
  const std::string name = "gram_" + std::to_string(n_lo) + "_" +
                           std::to_string(n_hi) + ".csv";
  write_file(out_path(cfg, name), [&](std::ostream& os) {
    csv_preamble(os, command_line, "n,gram_t,hardy_z,holds");
    for (const GramLawResult& r : rows) {
      os << r.n << ',' << fmt_double(r.g) << ',' << fmt_double(r.z) << ','
         << (r.holds ? 1 : 0) << "\n";
    }
  });
  return kExitOk;
}

// ===========================================================================
// avoid
// ===========================================================================

inline int cmd_avoid(int pair_lo, Family family, int N_max,
                     const std::optional<std::string>& rearrangement_path,
                     bool auto_mode, const RunConfig& cfg,
                     const std::string& command_line, std::ostream& status) {
  AvoidanceReport rep;
  if (auto_mode) {
    rep = family == Family::dh
              ? dh_auto_search(pair_lo, N_max, cfg.tracker())
              : auto_search(pair_lo, family, N_max, cfg.tracker());
  } else {
    require(rearrangement_path.has_value(),
            "avoid: need --rearrangement or --auto");
    const Rearrangement rear = load_rearrangement(*rearrangement_path);
    rep = family == Family::dh
              ? dh_run_avoidance_experiment(pair_lo, N_max, rear, cfg.tracker())
              : run_avoidance_experiment(pair_lo, family, N_max, rear,
                                         cfg.tracker());
  }
  const std::string name = "avoid_" + std::string(family_name(family)) + "_" +
                           std::to_string(pair_lo) + "_" +
                           std::to_string(pair_lo + 1) + ".json";
  write_file(out_path(cfg, name), [&](std::ostream& os) {
    write_avoidance_json(os, rep);
  });
  status << "verdict: " << verdict_name(rep.verdict) << " (baseline "
         << rep.baseline_events.size() << " events, rearranged "
         << rep.rearranged_events.size() << ")\n";
  (void)command_line;
  return rep.partial ? kExitPartial : kExitOk;
}

// ===========================================================================
// figure
// ===========================================================================

namespace detail {

// Imaginary part of one continued zero of the accelerated section per stage
// N = 0..N_max, followed through the pair homotopy.  The zero is named by
// its Gram label g: the two ladder zeros straddling Gram point g_n are the
// ladder indices n + 1 and n + 2 (the ladders interlace with that offset),
// and the followed zero is the lower of the two — the one whose climb past
// the Gram point is the Gram-law-violation signature.  While the pair is
// off the line the mirror members share one imaginary part, which is the
// recorded value.
inline std::vector<double> gram_zero_series(int gram_label, int N_max,
                                            const RunConfig& cfg) {
  TrackInput in;
  in.pair_lo = gram_label + 1;
  in.family = Family::accelerated;
  in.N_end = N_max;
  in.cfg = cfg.tracker();
  const PairTrajectory traj = track_pair(in);
  std::vector<double> out;
  out.reserve(N_max + 1);
  for (int N = 0; N <= N_max; ++N) {
    const PairSample* s = zsec::detail::stage_entry(traj, N);
    require(s != nullptr, "figure: missing stage entry in the trajectory");
    out.push_back(s->a.location.t);
  }
  return out;
}

}  // namespace detail

// Emit the data series behind one named figure as a CSV in the output
// directory.  Figures are data, never images; docs/ ships a gnuplot script
// per figure.
inline int cmd_figure(const std::string& id, const RunConfig& cfg,
                      const std::string& command_line) {
  const auto write_series = [&](const std::vector<std::string>& cols,
                                const std::vector<std::vector<double>>& rows) {
    write_file(out_path(cfg, id + ".csv"), [&](std::ostream& os) {
      write_series_csv(os, cols, rows, command_line);
    });
  };

  if (id == "fig1") {
    // Running ln|S_N| of the classical section at t = 17500, N <= 5000.
    const cplx s(0.5, 17500.0);
    std::vector<std::vector<double>> rows;
    cplx sum = 0.0;
    for (int n = 1; n <= 5000; ++n) {
      sum += b_term(n, s);
      rows.push_back({static_cast<double>(n), std::log(std::abs(sum))});
    }
    write_series({"N", "ln_abs_S"}, rows);
    return kExitOk;
  }

  if (id == "fig2") {
    // Classical vs accelerated running sums at t = 1200, N <= 600.
    const cplx s(0.5, 1200.0);
    const int n_max = 600;
    std::vector<double> cls(n_max + 1), acc(n_max + 1);
    cplx sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      sum += b_term(n, s);
      cls[n] = std::log(std::abs(sum));
    }
    StagedSection eng(Family::accelerated, std::nullopt);
    for (int n = 1; n <= n_max; ++n) {
      eng.advance_to(n);
      acc[n] = std::log(std::abs(eng.eval(s)));
    }
    std::vector<std::vector<double>> rows;
    for (int n = 1; n <= n_max; ++n)
      rows.push_back({static_cast<double>(n), cls[n], acc[n]});
    write_series({"N", "ln_abs_classical", "ln_abs_accelerated"}, rows);
    return kExitOk;
  }

  if (id == "fig3") {
    // ln|zeta| and ln|first term| on the line, t in [0, 50].
    std::vector<std::vector<double>> rows;
    const double step = 1.0 / 64.0;
    for (int i = 0; i <= static_cast<int>(50.0 / step); ++i) {
      const double t = i * step;
      const double lz = std::log(std::abs(zeta_reference(cplx(0.5, t))));
      const double l1 = std::log(std::abs(b_term(1, cplx(0.5, t))));
      rows.push_back({t, lz, l1});
    }
    write_series({"t", "ln_abs_zeta", "ln_abs_zeta1"}, rows);
    return kExitOk;
  }

  if (id == "fig4") {
    // ln|B_3| on the line, t in [0, 150].
    std::vector<std::vector<double>> rows;
    const double step = 1.0 / 64.0;
    for (int i = 0; i <= static_cast<int>(150.0 / step); ++i) {
      const double t = i * step;
      rows.push_back({t, std::log(std::abs(b_term(3, cplx(0.5, t))))});
    }
    write_series({"t", "ln_abs_B3"}, rows);
    return kExitOk;
  }

  if (id == "fig5" || id == "fig6") {
    // Accelerated line values over [86, 90] at the stages bracketing the
    // t ~ 88 departure (fig5: N = 8, 9) and return (fig6: N = 22, 23).
    const int Na = id == "fig5" ? 8 : 22;
    const int Nb = Na + 1;
    const double step = 1.0 / 256.0;
    const int count = static_cast<int>(4.0 / step) + 1;
    std::vector<double> va(count), vb(count);
    parallel_for(2, cfg.worker_count, [&](std::size_t which) {
      StagedSection eng(Family::accelerated, std::nullopt);
      eng.advance_to(which == 0 ? Na : Nb);
      std::vector<double>& out = which == 0 ? va : vb;
      for (int i = 0; i < count; ++i) out[i] = eng.line_value(86.0 + i * step);
    });
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < count; ++i) {
      const double t = 86.0 + i * step;
      rows.push_back({t, va[i], std::log(std::abs(va[i])), vb[i],
                      std::log(std::abs(vb[i]))});
    }
    write_series({"t", "value_N" + std::to_string(Na),
                  "ln_abs_N" + std::to_string(Na),
                  "value_N" + std::to_string(Nb),
                  "ln_abs_N" + std::to_string(Nb)},
                 rows);
    return kExitOk;
  }

  if (id == "fig7") {
    // Imaginary part of the Gram-label-126 zero of the accelerated section
    // against Gram point g_126, N = 0..89.
    const std::vector<double> ts = detail::gram_zero_series(126, 89, cfg);
    const double g = gram_point(126);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ts.size(); ++i)
      rows.push_back({static_cast<double>(i), ts[i], g});
    write_series({"N", "t_126", "g_126"}, rows);
    return kExitOk;
  }

  if (id == "fig8" || id == "fig9" || id == "fig10" || id == "fig11") {
    // Pair trajectories: fig8 (132,133) classical; fig9 (725,726)
    // accelerated; fig10 the same pair under the two-block reversal map;
    // fig11 the DH pair (44,45).
    TrackInput in;
    if (id == "fig8") {
      in = make_track_input(132, Family::classical, 150, std::nullopt, cfg);
    } else if (id == "fig9") {
      in = make_track_input(725, Family::accelerated, 300, std::nullopt, cfg);
    } else if (id == "fig10") {
      const Rearrangement rear =
          paper_rearrangement(PaperRearrangement::R_accelerated);
      in = make_track_input(725, Family::accelerated,
                            closure_end(300, rear), rear, cfg);
    } else {
      in = make_track_input(44, Family::dh, 200, std::nullopt, cfg);
    }
    const TrackRun run = track_with_retry(in);
    write_track_outputs(cfg, id, run, command_line);
    return run.partial ? kExitPartial : kExitOk;
  }

  throw domain_error("figure: unknown id " + id +
                     " (expected fig1..fig11)");
}

}  // namespace zsec::cli

#endif  // ZSEC_CLI_HPP
