#ifndef ZSEC_IO_HPP
#define ZSEC_IO_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "zsec/rearranger.hpp"
#include "zsec/sections.hpp"
#include "zsec/tracker.hpp"
#include "zsec/types.hpp"

namespace zsec {

// ===========================================================================
// Deterministic formatting
// ===========================================================================
//
// All numeric output goes through shortest round-trip formatting
// (std::to_chars), which is locale-independent and reproduces the exact
// double on read-back.  Identical inputs therefore produce byte-identical
// files.

inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  require(res.ec == std::errc(), "fmt_double: formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string fmt_long(long v) { return std::to_string(v); }

// Every CSV starts with the generating command line as a comment row and a
// header row naming the columns (ordinate columns are in units of t, the
// imaginary coordinate; sigma columns in units of the real coordinate).
inline void csv_preamble(std::ostream& os, const std::string& command_line,
                         const std::string& header) {
  os << "# command: " << command_line << "\n" << header << "\n";
}

// ===========================================================================
// Trajectory CSV + events sidecar JSON
// ===========================================================================

inline const char* kTrajectoryHeader =
    "pair_lo,pair_hi,family,N,t_param,sigma_lo,t_lo,sigma_hi,t_hi,on_line,"
    "event";

// One row per accepted sample.  The (sigma_lo, t_lo) columns carry the pair
// member stored first in the sample: the lower ordinate while on the line,
// the sigma < 1/2 mirror once off it.  The event column is empty except on
// the sample nearest to where a departure or return fired (events are
// bracketed between accepted homotopy steps, so they label the closest row
// of the same stage).  A non-empty partial_message adds a marker comment
// right after the header for trajectories cut short by tracking loss.
inline void write_trajectory_csv(std::ostream& os, const PairTrajectory& traj,
                                 const std::string& command_line,
                                 const std::string& partial_message = {}) {
  csv_preamble(os, command_line, kTrajectoryHeader);
  if (!partial_message.empty()) os << "# partial: " << partial_message << "\n";
  std::vector<std::string> labels(traj.samples.size());
  for (const CollisionEvent& e : traj.events) {
    std::size_t best = traj.samples.size();
    double best_gap = 0.0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      if (traj.samples[i].N != e.N) continue;
      const double gap = std::abs(traj.samples[i].t_param - e.t_param);
      if (best == traj.samples.size() || gap < best_gap) {
        best = i;
        best_gap = gap;
      }
    }
    if (best < traj.samples.size()) {
      if (!labels[best].empty()) labels[best] += ';';
      labels[best] += event_kind_name(e.kind);
    }
  }
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const PairSample& s = traj.samples[i];
    os << traj.pair_lo << ',' << traj.pair_hi << ','
       << family_name(traj.family) << ',' << s.N << ','
       << fmt_double(s.t_param) << ',' << fmt_double(s.a.location.sigma) << ','
       << fmt_double(s.a.location.t) << ',' << fmt_double(s.b.location.sigma)
       << ',' << fmt_double(s.b.location.t) << ',' << (s.on_line ? 1 : 0)
       << ',' << labels[i] << "\n";
  }
}

inline nlohmann::json events_to_json(const PairTrajectory& traj) {
  nlohmann::json events = nlohmann::json::array();
  for (const CollisionEvent& e : traj.events) {
    events.push_back({{"N", e.N},
                      {"t_param", e.t_param},
                      {"sigma", e.location.sigma},
                      {"t", e.location.t},
                      {"kind", event_kind_name(e.kind)}});
  }
  return nlohmann::json{{"pair", {traj.pair_lo, traj.pair_hi}},
                        {"events", events}};
}

inline void write_events_json(std::ostream& os, const PairTrajectory& traj) {
  os << events_to_json(traj).dump(2) << "\n";
}

// ===========================================================================
// Ladder CSV
// ===========================================================================

struct LadderRow {
  int k = 1;           // term index within the family
  int index = 0;       // zero index m
  double t_predicted = 0.0;
  double t_refined = 0.0;
  double residual = 0.0;  // |line value| at the refined ordinate
};

inline void write_ladder_csv(std::ostream& os, Family family,
                             const std::vector<LadderRow>& rows,
                             const std::string& command_line) {
  csv_preamble(os, command_line,
               "family,k,index,t_predicted,t_refined,residual");
  for (const LadderRow& r : rows) {
    os << family_name(family) << ',' << r.k << ',' << r.index << ','
       << fmt_double(r.t_predicted) << ',' << fmt_double(r.t_refined) << ','
       << fmt_double(r.residual) << "\n";
  }
}

// ===========================================================================
// Scan CSVs: on-line zeros and unit-box winding totals
// ===========================================================================

inline void write_zero_scan_csv(std::ostream& os, Family family, int N,
                                const std::vector<ZeroRecord>& zeros,
                                const std::string& command_line) {
  csv_preamble(os, command_line, "family,N,sigma,t,residual");
  for (const ZeroRecord& z : zeros) {
    os << family_name(family) << ',' << N << ','
       << fmt_double(z.location.sigma) << ',' << fmt_double(z.location.t)
       << ',' << fmt_double(z.residual) << "\n";
  }
}

struct BoxScanRow {
  double t_lo = 0.0;
  double t_hi = 0.0;
  long winding_count = 0;  // zeros in the open strip box, counting multiplicity
  long online_count = 0;   // on-line sign changes found in [t_lo, t_hi)
  long discrepancy = 0;    // winding_count - online_count (off-line zeros)
};

inline void write_box_scan_csv(std::ostream& os, Family family, int N,
                               const std::vector<BoxScanRow>& rows,
                               const std::string& command_line) {
  csv_preamble(os, command_line,
               "family,N,t_lo,t_hi,winding_count,online_count,discrepancy");
  for (const BoxScanRow& r : rows) {
    os << family_name(family) << ',' << N << ',' << fmt_double(r.t_lo) << ','
       << fmt_double(r.t_hi) << ',' << r.winding_count << ','
       << r.online_count << ',' << r.discrepancy << "\n";
  }
}

// ===========================================================================
// Generic figure series CSV
// ===========================================================================

inline void write_series_csv(std::ostream& os,
                             const std::vector<std::string>& columns,
                             const std::vector<std::vector<double>>& rows,
                             const std::string& command_line) {
  require(!columns.empty(), "write_series_csv: no columns");
  std::string header;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) header += ',';
    header += columns[i];
  }
  csv_preamble(os, command_line, header);
  for (const auto& row : rows) {
    require(row.size() == columns.size(),
            "write_series_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << fmt_double(row[i]);
    }
    os << "\n";
  }
}

// ===========================================================================
// Rearrangement JSON
// ===========================================================================
//
//   {"domain": [lo, hi],
//    "pieces": [{"from": a, "to": b, "kind": "identity"|"reflect", "c": n}]}
//
// Loading rebuilds the map through the piecewise factory, which re-validates
// the bijection; a malformed file is rejected with a domain error.

inline nlohmann::json rearrangement_to_json(const Rearrangement& r) {
  require(r.has_domain(), "rearrangement_to_json: map has no domain");
  nlohmann::json pieces = nlohmann::json::array();
  for (const Rearrangement::Piece& p : r.pieces()) {
    pieces.push_back({{"from", p.from},
                      {"to", p.to},
                      {"kind", p.reflect ? "reflect" : "identity"},
                      {"c", p.reflect ? p.c : 0}});
  }
  return nlohmann::json{{"domain", {r.lo(), r.hi()}}, {"pieces", pieces}};
}

inline Rearrangement rearrangement_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("domain") && j.contains("pieces"),
          "rearrangement: JSON needs \"domain\" and \"pieces\"");
  const auto& dom = j.at("domain");
  require(dom.is_array() && dom.size() == 2,
          "rearrangement: \"domain\" must be [lo, hi]");
  const int lo = dom.at(0).get<int>();
  const int hi = dom.at(1).get<int>();
  std::vector<Rearrangement::Piece> pieces;
  for (const auto& pj : j.at("pieces")) {
    Rearrangement::Piece p;
    p.from = pj.at("from").get<int>();
    p.to = pj.at("to").get<int>();
    const std::string kind = pj.at("kind").get<std::string>();
    if (kind == "reflect") {
      p.reflect = true;
      p.c = pj.at("c").get<int>();
    } else {
      require(kind == "identity",
              "rearrangement: piece kind must be \"identity\" or \"reflect\"");
      p.reflect = false;
      p.c = pj.contains("c") ? pj.at("c").get<int>() : 0;
    }
    pieces.push_back(p);
  }
  return Rearrangement::piecewise(lo, hi, std::move(pieces));
}

inline Rearrangement load_rearrangement(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("rearrangement: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw error("rearrangement: " + path + ": " + e.what());
  }
  return rearrangement_from_json(j);
}

inline void save_rearrangement(std::ostream& os, const Rearrangement& r) {
  os << rearrangement_to_json(r).dump(2) << "\n";
}

// ===========================================================================
// Avoidance report JSON
// ===========================================================================

inline nlohmann::json avoidance_report_to_json(const AvoidanceReport& rep) {
  const auto events_json = [](const std::vector<CollisionEvent>& evs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const CollisionEvent& e : evs) {
      arr.push_back({{"N", e.N},
                     {"t_param", e.t_param},
                     {"sigma", e.location.sigma},
                     {"t", e.location.t},
                     {"kind", event_kind_name(e.kind)}});
    }
    return arr;
  };
  nlohmann::json j{{"pair", {rep.pair_lo, rep.pair_hi}},
                   {"family", family_name(rep.family)},
                   {"N_max", rep.N_max},
                   {"baseline_events", events_json(rep.baseline_events)},
                   {"rearranged_events", events_json(rep.rearranged_events)},
                   {"verdict", verdict_name(rep.verdict)},
                   {"partial", rep.partial},
                   {"baseline_final_t", rep.baseline_final_t},
                   {"rearranged_final_t", rep.rearranged_final_t}};
  j["rearrangement"] = rep.rearrangement.has_domain()
                           ? rearrangement_to_json(rep.rearrangement)
                           : nlohmann::json();
  return j;
}

inline void write_avoidance_json(std::ostream& os, const AvoidanceReport& rep) {
  os << avoidance_report_to_json(rep).dump(2) << "\n";
}

// ===========================================================================
// File helper
// ===========================================================================

template <typename WriteFn>
void write_file(const std::string& path, WriteFn&& fn) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw error("io: cannot open " + path + " for writing");
  fn(os);
  os.flush();
  if (!os) throw error("io: write to " + path + " failed");
}

}  // namespace zsec

#endif  // ZSEC_IO_HPP
