#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggo/baselines.hpp"
#include "ggo/cmaes.hpp"
#include "ggo/eval.hpp"
#include "ggo/piu.hpp"

namespace ggo {

inline constexpr int kExperimentSchemaVersion = 1;

/// Map source: a file path, or a generator spec.
struct MapSource {
  std::string path;       // resolved against the config file's directory
  std::string generator;  // "", "random" or "warehouse"
  int height = 0;
  int width = 0;
  int obstacles = 0;
  std::uint64_t seed = 0;
  int block_rows = 0;
  int block_cols = 0;
};

/// Map a trained update model is transferred to, with its own agent count.
struct TransferSpec {
  MapSource map;
  int agents = 0;
};

struct ExperimentConfig {
  std::string name;
  MapSource map;
  std::optional<TaskMode> task_mode;  // default_task_mode(map) when unset
  SimConfig sim;                      // used during optimization
  WeightBounds bounds;
  std::string method;  // unweighted | crisscross | traffic-flow | hm-cost | cmaes | piu
  BaselineParams baseline;
  CmaesConfig cmaes;
  PiuConfig piu;
  int eval_runs = 50;
  std::uint64_t eval_seed = 0;
  int eval_timesteps = 0;  // 0 means sim.timesteps
  std::vector<std::string> compare;  // baseline methods evaluated alongside
  /// Extra maps the trained model is applied to (piu only).
  std::vector<TransferSpec> transfers;
  int threads = 0;
};

/// Parses and validates a config document. Errors are ConfigError with the
/// offending field path, e.g. "cmaes.batch: expected a positive integer".
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical echo of a parsed config (all defaults filled in).
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

GridMap resolve_map(const MapSource& src);

struct ExperimentOutcome {
  EvalReport report;  // the method's own guidance graph
  std::vector<std::pair<std::string, EvalReport>> comparisons;
  std::vector<std::pair<std::string, EvalReport>> transfers;  // piu transfer maps
  std::vector<std::pair<std::string, EvalReport>> transfer_baselines;
};

/// Builds the guidance graph, evaluates it and writes into `out_dir`:
/// config.json, guidance.json, report.json, compare-<method>.json,
/// optimization_log.jsonl (optimizers), model.json (piu), transfer files,
/// summary.json and timings.json. Everything except timings.json is
/// identical across reruns of the same config.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ggo
