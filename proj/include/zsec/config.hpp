#ifndef ZSEC_CONFIG_HPP
#define ZSEC_CONFIG_HPP

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "zsec/tracker.hpp"
#include "zsec/types.hpp"

namespace zsec {

// ===========================================================================
// Run configuration
// ===========================================================================
//
// One flat bundle of every tunable the command-line surface exposes: root
// finding tolerances, tracker thresholds, worker count, output directory and
// the seed used by randomized property sweeps.  Values load from a JSON file
// and individual fields can then be overridden through ZC_-prefixed
// environment variables, so a single config file can serve a whole batch of
// runs with per-run tweaks.

struct RunConfig {
  // Root-finding tolerances.
  double abs_eps = 1e-12;
  double rel_eps = 0.0;
  int max_iter = 200000;

  // Tracker thresholds.
  double collision_eps_factor = 20.0;  // collision_eps = spacing / factor
  double online_eps = 1e-6;            // |sigma - 1/2| on-line band
  int min_interval_len = 3;            // kept fluctuation-window length

  // Orchestration.
  int worker_count = 1;
  std::string output_dir = ".";
  std::uint64_t seed = 20260822ULL;

  Tolerance tolerance() const {
    Tolerance t;
    t.abs_eps = abs_eps;
    t.rel_eps = rel_eps;
    t.max_iter = max_iter;
    return t;
  }

  TrackerConfig tracker() const {
    TrackerConfig c;
    c.online_eps = online_eps;
    c.collision_eps_divisor = collision_eps_factor;
    c.tol = tolerance();
    return c;
  }

  void validate() const {
    require(abs_eps > 0.0, "config: abs_eps must be positive");
    require(rel_eps >= 0.0, "config: rel_eps must be non-negative");
    require(max_iter > 0, "config: max_iter must be positive");
    require(collision_eps_factor > 0.0,
            "config: collision_eps_factor must be positive");
    require(online_eps > 0.0, "config: online_eps must be positive");
    require(min_interval_len > 0, "config: min_interval_len must be positive");
    require(worker_count >= 1, "config: worker_count must be >= 1");
    require(!output_dir.empty(), "config: output_dir must be non-empty");
  }
};

// ---------------------------------------------------------------------------
// JSON form
// ---------------------------------------------------------------------------
//
//   {
//     "tolerances": {"abs_eps": 1e-12, "rel_eps": 0, "max_iter": 200000},
//     "tracker": {"collision_eps_factor": 20, "online_eps": 1e-6,
//                 "min_interval_len": 3},
//     "worker_count": 4, "output_dir": "out", "seed": 7
//   }
//
// Every key is optional; absent keys keep their defaults.

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  require(j.is_object(), "config: top-level JSON value must be an object");
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    require(t.is_object(), "config: \"tolerances\" must be an object");
    if (t.contains("abs_eps")) cfg.abs_eps = t.at("abs_eps").get<double>();
    if (t.contains("rel_eps")) cfg.rel_eps = t.at("rel_eps").get<double>();
    if (t.contains("max_iter")) cfg.max_iter = t.at("max_iter").get<int>();
  }
  if (j.contains("tracker")) {
    const auto& t = j.at("tracker");
    require(t.is_object(), "config: \"tracker\" must be an object");
    if (t.contains("collision_eps_factor"))
      cfg.collision_eps_factor = t.at("collision_eps_factor").get<double>();
    if (t.contains("online_eps"))
      cfg.online_eps = t.at("online_eps").get<double>();
    if (t.contains("min_interval_len"))
      cfg.min_interval_len = t.at("min_interval_len").get<int>();
  }
  if (j.contains("worker_count"))
    cfg.worker_count = j.at("worker_count").get<int>();
  if (j.contains("output_dir"))
    cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  return nlohmann::json{
      {"tolerances",
       {{"abs_eps", cfg.abs_eps},
        {"rel_eps", cfg.rel_eps},
        {"max_iter", cfg.max_iter}}},
      {"tracker",
       {{"collision_eps_factor", cfg.collision_eps_factor},
        {"online_eps", cfg.online_eps},
        {"min_interval_len", cfg.min_interval_len}}},
      {"worker_count", cfg.worker_count},
      {"output_dir", cfg.output_dir},
      {"seed", cfg.seed}};
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw error("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Environment overrides (prefix ZC_)
// ---------------------------------------------------------------------------
//
// ZC_ABS_EPS, ZC_REL_EPS, ZC_MAX_ITER, ZC_COLLISION_EPS_FACTOR,
// ZC_ONLINE_EPS, ZC_MIN_INTERVAL_LEN, ZC_WORKERS, ZC_OUTPUT_DIR, ZC_SEED.
// The getter is injectable so tests need not mutate the process environment.

using EnvGetter = std::function<const char*(const char*)>;

inline void apply_env_overrides(
    RunConfig& cfg, const EnvGetter& getenv_fn = [](const char* k) {
      return static_cast<const char*>(std::getenv(k));
    }) {
  const auto parse_double = [](const char* name, const char* v) {
    char* end = nullptr;
    const double x = std::strtod(v, &end);
    if (end == v || *end != '\0')
      throw domain_error(std::string("config: ") + name +
                         " is not a number: " + v);
    return x;
  };
  const auto parse_long = [](const char* name, const char* v) {
    char* end = nullptr;
    const long x = std::strtol(v, &end, 10);
    if (end == v || *end != '\0')
      throw domain_error(std::string("config: ") + name +
                         " is not an integer: " + v);
    return x;
  };
  if (const char* v = getenv_fn("ZC_ABS_EPS"))
    cfg.abs_eps = parse_double("ZC_ABS_EPS", v);
  if (const char* v = getenv_fn("ZC_REL_EPS"))
    cfg.rel_eps = parse_double("ZC_REL_EPS", v);
  if (const char* v = getenv_fn("ZC_MAX_ITER"))
    cfg.max_iter = static_cast<int>(parse_long("ZC_MAX_ITER", v));
  if (const char* v = getenv_fn("ZC_COLLISION_EPS_FACTOR"))
    cfg.collision_eps_factor = parse_double("ZC_COLLISION_EPS_FACTOR", v);
  if (const char* v = getenv_fn("ZC_ONLINE_EPS"))
    cfg.online_eps = parse_double("ZC_ONLINE_EPS", v);
  if (const char* v = getenv_fn("ZC_MIN_INTERVAL_LEN"))
    cfg.min_interval_len = static_cast<int>(parse_long("ZC_MIN_INTERVAL_LEN", v));
  if (const char* v = getenv_fn("ZC_WORKERS"))
    cfg.worker_count = static_cast<int>(parse_long("ZC_WORKERS", v));
  if (const char* v = getenv_fn("ZC_OUTPUT_DIR")) cfg.output_dir = v;
  if (const char* v = getenv_fn("ZC_SEED"))
    cfg.seed = static_cast<std::uint64_t>(parse_long("ZC_SEED", v));
}

// File (optional) -> environment -> validation.
inline RunConfig effective_config(
    const std::optional<std::string>& config_path,
    const EnvGetter& getenv_fn = [](const char* k) {
      return static_cast<const char*>(std::getenv(k));
    }) {
  RunConfig cfg = config_path ? load_config(*config_path) : RunConfig{};
  apply_env_overrides(cfg, getenv_fn);
  cfg.validate();
  return cfg;
}

}  // namespace zsec

#endif  // ZSEC_CONFIG_HPP
