// Command surface: configuration loading, deterministic serialization, and
// the command-level behaviors (scans, figures, tracking outputs).

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "zsec/cli.hpp"
#include "zsec/config.hpp"
#include "zsec/io.hpp"

namespace fs = std::filesystem;
using namespace zsec;

namespace {

// Fresh scratch directory per test suite run.
class ScratchDir {
 public:
  ScratchDir() {
    dir_ = fs::temp_directory_path() /
           ("zsec_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  ~ScratchDir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }
  std::string dir() const { return dir_.string(); }

 private:
  fs::path dir_;
};

ScratchDir& scratch() {
  static ScratchDir s;
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << "cannot open " << path;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

RunConfig test_config(const std::string& subdir) {
  RunConfig cfg;
  cfg.output_dir = scratch().path(subdir);
  return cfg;
}

}  // namespace

// ===========================================================================
// Configuration
// ===========================================================================

TEST(Config, DefaultsValidateAndMapOntoTrackerSettings) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  const TrackerConfig tc = cfg.tracker();
  EXPECT_EQ(tc.online_eps, cfg.online_eps);
  EXPECT_EQ(tc.collision_eps_divisor, cfg.collision_eps_factor);
  EXPECT_EQ(tc.tol.abs_eps, cfg.abs_eps);
  EXPECT_EQ(cfg.tolerance().max_iter, cfg.max_iter);
}

TEST(Config, JsonRoundTripPreservesEveryField) {
  RunConfig cfg;
  cfg.abs_eps = 3e-11;
  cfg.rel_eps = 1e-9;
  cfg.max_iter = 777;
  cfg.collision_eps_factor = 12.5;
  cfg.online_eps = 2e-7;
  cfg.min_interval_len = 4;
  cfg.worker_count = 3;
  cfg.output_dir = "somewhere";
  cfg.seed = 424242;
  const RunConfig back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(back.abs_eps, cfg.abs_eps);
  EXPECT_EQ(back.rel_eps, cfg.rel_eps);
  EXPECT_EQ(back.max_iter, cfg.max_iter);
  EXPECT_EQ(back.collision_eps_factor, cfg.collision_eps_factor);
  EXPECT_EQ(back.online_eps, cfg.online_eps);
  EXPECT_EQ(back.min_interval_len, cfg.min_interval_len);
  EXPECT_EQ(back.worker_count, cfg.worker_count);
  EXPECT_EQ(back.output_dir, cfg.output_dir);
  EXPECT_EQ(back.seed, cfg.seed);
}

TEST(Config, PartialJsonKeepsDefaultsForAbsentKeys) {
  const auto j = nlohmann::json::parse(R"({"worker_count": 5})");
  const RunConfig cfg = config_from_json(j);
  EXPECT_EQ(cfg.worker_count, 5);
  EXPECT_EQ(cfg.abs_eps, RunConfig{}.abs_eps);
  EXPECT_EQ(cfg.output_dir, RunConfig{}.output_dir);
}

TEST(Config, EnvironmentOverridesWinOverTheFile) {
  const std::string path = scratch().path("cfg.json");
  {
    std::ofstream out(path);
    out << R"({"worker_count": 2, "tracker": {"online_eps": 1e-5}})";
  }
  const std::map<std::string, std::string> env = {
      {"ZC_WORKERS", "7"}, {"ZC_ABS_EPS", "1e-10"}};
  const auto getter = [&env](const char* k) -> const char* {
    const auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  const RunConfig cfg = effective_config(path, getter);
  EXPECT_EQ(cfg.worker_count, 7);       // env beats file
  EXPECT_EQ(cfg.online_eps, 1e-5);      // file beats default
  EXPECT_EQ(cfg.abs_eps, 1e-10);        // env beats default
  EXPECT_EQ(cfg.min_interval_len, 3);   // untouched default
}

TEST(Config, MalformedValuesAndInvariantsAreRejected) {
  RunConfig cfg;
  cfg.worker_count = 0;
  EXPECT_THROW(cfg.validate(), domain_error);
  cfg = RunConfig{};
  cfg.abs_eps = 0.0;
  EXPECT_THROW(cfg.validate(), domain_error);
  cfg = RunConfig{};
  cfg.min_interval_len = -1;
  EXPECT_THROW(cfg.validate(), domain_error);

  const auto getter = [](const char* k) -> const char* {
    return std::string(k) == "ZC_ABS_EPS" ? "not-a-number" : nullptr;
  };
  RunConfig base;
  EXPECT_THROW(apply_env_overrides(base, getter), domain_error);
  EXPECT_THROW(load_config(scratch().path("missing.json")), error);
}

// ===========================================================================
// Rearrangement JSON
// ===========================================================================

TEST(RearrangementJson, RoundTripReproducesTheMapExactly) {
  const Rearrangement r =
      paper_rearrangement(PaperRearrangement::R_accelerated);
  const Rearrangement back = rearrangement_from_json(rearrangement_to_json(r));
  EXPECT_EQ(back.lo(), r.lo());
  EXPECT_EQ(back.hi(), r.hi());
  for (int n = r.lo(); n <= r.hi(); ++n) EXPECT_EQ(back(n), r(n)) << n;
}

TEST(RearrangementJson, FileRoundTripThroughDisk) {
  const Rearrangement r = Rearrangement::reverse_intervals(1, 40, {{5, 9}});
  const std::string path = scratch().path("rear.json");
  write_file(path, [&](std::ostream& os) { save_rearrangement(os, r); });
  const Rearrangement back = load_rearrangement(path);
  for (int n = 1; n <= 40; ++n) EXPECT_EQ(back(n), r(n));
}

TEST(RearrangementJson, NonBijectionsAndBadKindsAreRejected) {
  // Two reflections sharing index 20 collapse two inputs onto one image.
  const auto overlapping = nlohmann::json::parse(R"({
    "domain": [1, 40],
    "pieces": [{"from": 10, "to": 20, "kind": "reflect", "c": 30},
               {"from": 20, "to": 30, "kind": "reflect", "c": 50}]})");
  EXPECT_THROW(rearrangement_from_json(overlapping), domain_error);

  const auto bad_kind = nlohmann::json::parse(R"({
    "domain": [1, 10],
    "pieces": [{"from": 2, "to": 4, "kind": "rotate", "c": 6}]})");
  EXPECT_THROW(rearrangement_from_json(bad_kind), domain_error);

  const auto no_domain = nlohmann::json::parse(R"({"pieces": []})");
  EXPECT_THROW(rearrangement_from_json(no_domain), domain_error);
}

// ===========================================================================
// Trajectory serialization
// ===========================================================================

namespace {

const PairTrajectory& dh_departure_trajectory() {
  static const PairTrajectory traj = [] {
    TrackInput in;
    in.pair_lo = 44;
    in.family = Family::dh;
    in.N_end = 20;
    return dh_track_pair(in);
  }();
  return traj;
}

}  // namespace

TEST(TrajectoryCsv, ByteIdenticalAcrossRepeatedWrites) {
  const PairTrajectory& traj = dh_departure_trajectory();
  std::ostringstream a, b;
  write_trajectory_csv(a, traj, "zsec test");
  write_trajectory_csv(b, traj, "zsec test");
  EXPECT_FALSE(a.str().empty());
  EXPECT_EQ(a.str(), b.str());
}

TEST(TrajectoryCsv, HeaderCommandCommentAndEventLabel) {
  const PairTrajectory& traj = dh_departure_trajectory();
  std::ostringstream os;
  write_trajectory_csv(os, traj, "zsec dh-track --pair 44,45");
  const auto ls = lines_of(os.str());
  ASSERT_GE(ls.size(), 3u);
  EXPECT_EQ(ls[0], "# command: zsec dh-track --pair 44,45");
  EXPECT_EQ(ls[1], kTrajectoryHeader);

  int departure_rows = 0;
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const auto cells = split_csv(ls[i]);
    ASSERT_EQ(cells.size(), 11u) << ls[i];
    EXPECT_EQ(cells[0], "44");
    EXPECT_EQ(cells[2], "dh");
    if (cells[10] == "departure") ++departure_rows;
  }
  EXPECT_EQ(departure_rows, 1);  // the N=12 departure labels exactly one row
}

TEST(TrajectoryCsv, EventsSidecarCarriesTheDeparture) {
  const nlohmann::json j = events_to_json(dh_departure_trajectory());
  ASSERT_EQ(j.at("pair").at(0).get<int>(), 44);
  ASSERT_EQ(j.at("events").size(), 1u);
  const auto& e = j.at("events").at(0);
  EXPECT_EQ(e.at("kind").get<std::string>(), "departure");
  EXPECT_EQ(e.at("N").get<int>(), 12);
  EXPECT_NEAR(e.at("t").get<double>(), 85.6988, 0.05);
}

TEST(AvoidanceJson, ReportSerializesVerdictAndBothLegs) {
  AvoidanceReport rep;
  rep.pair_lo = 10;
  rep.pair_hi = 11;
  rep.family = Family::accelerated;
  rep.N_max = 50;
  rep.verdict = Verdict::avoided;
  rep.rearrangement = Rearrangement::reverse_intervals(0, 60, {{5, 9}});
  const nlohmann::json j = avoidance_report_to_json(rep);
  EXPECT_EQ(j.at("verdict").get<std::string>(), "avoided");
  EXPECT_EQ(j.at("family").get<std::string>(), "accelerated");
  EXPECT_EQ(j.at("rearrangement").at("domain").at(1).get<int>(), 60);
  EXPECT_EQ(j.at("baseline_events").size(), 0u);
}

// ===========================================================================
// Numeric formatting
// ===========================================================================

TEST(Formatting, ShortestRoundTripSurvivesParsing) {
  for (const double v : {0.1, 1.0, -3.5e-300, 85.69877708525136, 1e22}) {
    EXPECT_EQ(std::stod(fmt_double(v)), v) << fmt_double(v);
  }
  EXPECT_EQ(fmt_double(1.0), "1");
  EXPECT_EQ(fmt_double(0.5), "0.5");
}

// ===========================================================================
// cmd_scan
// ===========================================================================

TEST(CmdScan, FirstSectionZerosMatchTheLadderOneToOne) {
  const RunConfig cfg = test_config("scan1");
  ASSERT_EQ(cli::cmd_scan(10.0, 100.0, Family::classical, 1, cfg, "zsec scan"),
            cli::kExitOk);
  const auto ls =
      lines_of(slurp(cfg.output_dir + "/scan_zeros_classical_N1.csv"));
  ASSERT_GE(ls.size(), 3u);

  std::vector<double> ladder;
  for (int n = 1;; ++n) {
    const double t = refine_fl_zero(n);
    if (t > 100.0) break;
    ladder.push_back(t);
  }
  ASSERT_EQ(ls.size() - 2, ladder.size());
  for (std::size_t i = 0; i + 2 < ls.size(); ++i) {
    const auto cells = split_csv(ls[i + 2]);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[0], "classical");
    EXPECT_NEAR(std::stod(cells[3]), ladder[i], 1e-8) << i;
  }
}

TEST(CmdScan, AcceleratedNineShowsTheOffLineDiscrepancy) {
  const RunConfig cfg = test_config("scan2");
  ASSERT_EQ(
      cli::cmd_scan(86.0, 90.0, Family::accelerated, 9, cfg, "zsec scan"),
      cli::kExitOk);
  const auto zeros =
      lines_of(slurp(cfg.output_dir + "/scan_zeros_accelerated_N9.csv"));
  EXPECT_EQ(zeros.size(), 2u);  // header only: no on-line zeros

  const auto boxes =
      lines_of(slurp(cfg.output_dir + "/scan_boxes_accelerated_N9.csv"));
  ASSERT_EQ(boxes.size(), 6u);  // comment + header + four unit boxes
  long total_winding = 0, total_discrepancy = 0;
  bool flagged_88 = false;
  for (std::size_t i = 2; i < boxes.size(); ++i) {
    const auto cells = split_csv(boxes[i]);
    ASSERT_EQ(cells.size(), 7u);
    total_winding += std::stol(cells[4]);
    total_discrepancy += std::stol(cells[6]);
    if (cells[2] == "88") {
      flagged_88 = std::stol(cells[6]) == 2 && std::stol(cells[4]) == 2;
    }
  }
  EXPECT_EQ(total_winding, 2);
  EXPECT_EQ(total_discrepancy, 2);
  EXPECT_TRUE(flagged_88);
}

TEST(CmdScan, EmptyRangeWritesHeadersOnly) {
  const RunConfig cfg = test_config("scan3");
  ASSERT_EQ(cli::cmd_scan(50.0, 50.0, Family::classical, 3, cfg, "zsec scan"),
            cli::kExitOk);
  EXPECT_EQ(lines_of(slurp(cfg.output_dir + "/scan_zeros_classical_N3.csv"))
                .size(),
            2u);
  EXPECT_EQ(lines_of(slurp(cfg.output_dir + "/scan_boxes_classical_N3.csv"))
                .size(),
            2u);
}

// ===========================================================================
// cmd_figure examples
// ===========================================================================

namespace {

int count_sign_changes(const std::vector<double>& v) {
  int changes = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i - 1] * v[i] < 0.0) ++changes;
  return changes;
}

}  // namespace

TEST(CmdFigure, Fig5HasTwoSignChangesAtStageEightAndNoneAtNine) {
  const RunConfig cfg = test_config("fig5");
  ASSERT_EQ(cli::cmd_figure("fig5", cfg, "zsec figure fig5"), cli::kExitOk);
  const auto ls = lines_of(slurp(cfg.output_dir + "/fig5.csv"));
  ASSERT_GE(ls.size(), 100u);
  EXPECT_EQ(ls[1], "t,value_N8,ln_abs_N8,value_N9,ln_abs_N9");
  std::vector<double> v8, v9;
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const auto cells = split_csv(ls[i]);
    ASSERT_EQ(cells.size(), 5u);
    v8.push_back(std::stod(cells[1]));
    v9.push_back(std::stod(cells[3]));
  }
  EXPECT_EQ(count_sign_changes(v8), 2);
  EXPECT_EQ(count_sign_changes(v9), 0);
}

TEST(CmdFigure, Fig7CrossesTheGramPointAtLeastOnce) {
  const RunConfig cfg = test_config("fig7");
  ASSERT_EQ(cli::cmd_figure("fig7", cfg, "zsec figure fig7"), cli::kExitOk);
  const auto ls = lines_of(slurp(cfg.output_dir + "/fig7.csv"));
  ASSERT_EQ(ls.size(), 2u + 90u);  // N = 0..89
  std::vector<double> excess;
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const auto cells = split_csv(ls[i]);
    ASSERT_EQ(cells.size(), 3u);
    excess.push_back(std::stod(cells[1]) - std::stod(cells[2]));
  }
  EXPECT_GE(count_sign_changes(excess), 1);
}

TEST(CmdFigure, Fig1PlateausAroundTheReferenceAfterTheGoodIndex) {
  const RunConfig cfg = test_config("fig1");
  ASSERT_EQ(cli::cmd_figure("fig1", cfg, "zsec figure fig1"), cli::kExitOk);
  const auto ls = lines_of(slurp(cfg.output_dir + "/fig1.csv"));
  ASSERT_EQ(ls.size(), 2u + 5000u);
  const double ln_ref = std::log(std::abs(zeta_reference(cplx(0.5, 17500.0))));
  double tail_dev = 0.0, early_dev = 0.0;
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const auto cells = split_csv(ls[i]);
    const double n = std::stod(cells[0]);
    const double dev = std::abs(std::stod(cells[1]) - ln_ref);
    if (n >= 3000.0) tail_dev = std::max(tail_dev, dev);
    if (n >= 100.0 && n <= 2000.0) early_dev = std::max(early_dev, dev);
  }
  // Measured: tail max 0.034, early max 0.82; the plateau sets in near
  // N ~ 17500 / (2 pi) ~ 2785.
  EXPECT_LE(tail_dev, 0.1);
  EXPECT_GE(early_dev, 0.3);
}

TEST(CmdFigure, UnknownIdIsRejected) {
  const RunConfig cfg = test_config("figbad");
  EXPECT_THROW(cli::cmd_figure("fig99", cfg, "zsec"), domain_error);
}

// ===========================================================================
// Determinism and loss recovery
// ===========================================================================

TEST(Determinism, SameCommandProducesByteIdenticalFiles) {
  RunConfig cfg_a = test_config("det_a");
  RunConfig cfg_b = test_config("det_b");
  ASSERT_EQ(cli::cmd_figure("fig5", cfg_a, "zsec figure fig5"), cli::kExitOk);
  ASSERT_EQ(cli::cmd_figure("fig5", cfg_b, "zsec figure fig5"), cli::kExitOk);
  EXPECT_EQ(slurp(cfg_a.output_dir + "/fig5.csv"),
            slurp(cfg_b.output_dir + "/fig5.csv"));
}

TEST(LossRecovery, RetryReturnsAPartialTrajectoryInsteadOfThrowing) {
  // The (126, 127) accelerated pairing splits across two different
  // collisions: the pair tracker reports a structural loss at stage 13, and
  // the finer-step retry fails even harder (the continued zero escapes to
  // where the functional-equation factor overflows). The retry ladder must
  // hand back the partial trajectory rather than surface either failure.
  TrackInput in;
  in.pair_lo = 126;
  in.family = Family::accelerated;
  in.N_end = 89;
  const cli::TrackRun run = cli::track_with_retry(in, 1);
  ASSERT_TRUE(run.partial);
  EXPECT_FALSE(run.traj.samples.empty());
  EXPECT_NE(run.loss_message.find("N=13"), std::string::npos)
      << run.loss_message;
}

TEST(CmdTrack, WritesTrajectoryAndEventsWithExitCodeZero) {
  const RunConfig cfg = test_config("track");
  ASSERT_EQ(cli::cmd_track(44, Family::dh, 20, std::nullopt, cfg,
                           "zsec dh-track --pair 44,45 --N-max 20"),
            cli::kExitOk);
  const auto ls = lines_of(slurp(cfg.output_dir + "/track_dh_44_45.csv"));
  ASSERT_GE(ls.size(), 4u);
  EXPECT_EQ(ls[1], kTrajectoryHeader);
  const auto j = nlohmann::json::parse(
      slurp(cfg.output_dir + "/track_dh_44_45.events.json"));
  EXPECT_EQ(j.at("events").size(), 1u);
}
