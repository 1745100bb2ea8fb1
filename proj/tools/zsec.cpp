// zsec: command-line surface for the zeta-section dynamics library.
//
// Commands: figure, track, scan, atlas, gram, avoid, dh-track.
// Exit codes: 0 success, 2 partial output (a tracking loss survived the
// retry policy; the partial trajectory is written and marked), 1 error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zsec/cli.hpp"

namespace {

std::string join_command_line(int argc, char** argv) {
  std::string out = "zsec";
  for (int i = 1; i < argc; ++i) {
    out += ' ';
    out += argv[i];
  }
  return out;
}

int require_pair(const std::vector<int>& pair) {
  zsec::require(pair.size() == 2, "expected --pair a,b");
  zsec::require(pair[1] == pair[0] + 1,
                "pairs are consecutive ladder indices: b must equal a + 1");
  return pair[0];
}

}  // namespace

int main(int argc, char** argv) {
  const std::string command_line = join_command_line(argc, argv);

  CLI::App app{"Zeta-section dynamics: figures, pair tracking, scans, "
               "ladders, Gram checks and avoidance experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  double tol = 0.0;
  app.add_option("--config", config_path,
                 "JSON config file (ZC_* environment variables override "
                 "individual fields)");
  app.add_option("--out", out_dir, "output directory (default from config)");
  app.add_option("--workers", workers, "worker thread count");
  app.add_option("--tol", tol, "absolute root-finding tolerance");

  // figure
  auto* fig = app.add_subcommand("figure", "emit a named figure's data CSV");
  std::string fig_id;
  fig->add_option("id", fig_id, "fig1..fig11")->required();

  // track
  auto* track = app.add_subcommand(
      "track", "track a zero pair through the term-by-term homotopy");
  std::vector<int> track_pair_v;
  std::string track_family = "classical";
  int track_n_max = 50;
  std::string track_rear;
  track->add_option("--pair", track_pair_v, "zero pair a,b (b = a + 1)")
      ->delimiter(',')
      ->required();
  track->add_option("--family", track_family,
                    "classical | accelerated | dh");
  track->add_option("--N-max", track_n_max, "final stage")->required();
  track->add_option("--rearrangement", track_rear,
                    "rearrangement JSON file applied to the section order");

  // scan
  auto* scan = app.add_subcommand(
      "scan", "dump on-line zeros and per-unit-box winding counts");
  double scan_t_lo = 0.0, scan_t_hi = 0.0;
  std::string scan_family = "classical";
  int scan_n = 1;
  scan->add_option("--t-lo", scan_t_lo, "lower ordinate")->required();
  scan->add_option("--t-hi", scan_t_hi, "upper ordinate")->required();
  scan->add_option("--family", scan_family, "classical | accelerated | dh");
  scan->add_option("--N", scan_n, "section stage")->required();

  // atlas
  auto* atlas = app.add_subcommand(
      "atlas", "dump a zero ladder: predictions, refinements, residuals");
  std::string atlas_family = "classical";
  int atlas_k = 1, atlas_lo = 1, atlas_hi = 100;
  atlas->add_option("--family", atlas_family, "classical | dh");
  atlas->add_option("--k", atlas_k, "term index (classical only; 1 = first)");
  atlas->add_option("--index-lo", atlas_lo, "first zero index")->required();
  atlas->add_option("--index-hi", atlas_hi, "last zero index")->required();

  // gram
  auto* gram = app.add_subcommand("gram", "Gram-law sign checks over a range");
  int gram_lo = 0, gram_hi = 100;
  gram->add_option("--n-lo", gram_lo, "first Gram index")->required();
  gram->add_option("--n-hi", gram_hi, "last Gram index")->required();

  // avoid
  auto* avoid = app.add_subcommand(
      "avoid", "run a collision-avoidance experiment for a pair");
  std::vector<int> avoid_pair_v;
  std::string avoid_family = "accelerated";
  int avoid_n_max = 300;
  std::string avoid_rear;
  bool avoid_auto = false;
  avoid->add_option("--pair", avoid_pair_v, "zero pair a,b (b = a + 1)")
      ->delimiter(',')
      ->required();
  avoid->add_option("--family", avoid_family, "classical | accelerated | dh");
  avoid->add_option("--N-max", avoid_n_max, "final stage")->required();
  avoid->add_option("--rearrangement", avoid_rear,
                    "candidate rearrangement JSON file");
  avoid->add_flag("--auto", avoid_auto,
                  "search interval reversals automatically");

  // dh-track
  auto* dh_track = app.add_subcommand(
      "dh-track", "track a Davenport-Heilbronn zero pair");
  std::vector<int> dh_pair_v;
  int dh_n_max = 200;
  dh_track->add_option("--pair", dh_pair_v, "zero pair a,b (b = a + 1)")
      ->delimiter(',')
      ->required();
  dh_track->add_option("--N-max", dh_n_max, "final stage")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? zsec::cli::kExitOk : zsec::cli::kExitError;
  }

  try {
    zsec::RunConfig cfg = zsec::effective_config(
        config_path.empty() ? std::nullopt
                            : std::optional<std::string>(config_path));
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers > 0) cfg.worker_count = workers;
    if (tol > 0.0) cfg.abs_eps = tol;
    cfg.validate();

    const auto opt_path = [](const std::string& s) {
      return s.empty() ? std::nullopt : std::optional<std::string>(s);
    };

    if (app.got_subcommand(fig))
      return zsec::cli::cmd_figure(fig_id, cfg, command_line);
    if (app.got_subcommand(track))
      return zsec::cli::cmd_track(require_pair(track_pair_v),
                                  zsec::family_from_name(track_family),
                                  track_n_max, opt_path(track_rear), cfg,
                                  command_line);
    if (app.got_subcommand(scan))
      return zsec::cli::cmd_scan(scan_t_lo, scan_t_hi,
                                 zsec::family_from_name(scan_family), scan_n,
                                 cfg, command_line);
    if (app.got_subcommand(atlas))
      return zsec::cli::cmd_atlas(zsec::family_from_name(atlas_family),
                                  atlas_k, atlas_lo, atlas_hi, cfg,
                                  command_line);
    if (app.got_subcommand(gram))
      return zsec::cli::cmd_gram(gram_lo, gram_hi, cfg, command_line);
    if (app.got_subcommand(avoid))
      return zsec::cli::cmd_avoid(require_pair(avoid_pair_v),
                                  zsec::family_from_name(avoid_family),
                                  avoid_n_max, opt_path(avoid_rear),
                                  avoid_auto, cfg, command_line, std::cout);
    if (app.got_subcommand(dh_track))
      return zsec::cli::cmd_track(require_pair(dh_pair_v), zsec::Family::dh,
                                  dh_n_max, std::nullopt, cfg, command_line);
    std::cerr << "zsec: no command\n";
    return zsec::cli::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "zsec: error: " << e.what() << "\n";
    return zsec::cli::kExitError;
  }
}
