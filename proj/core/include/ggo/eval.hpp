#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggo/guidance.hpp"
#include "ggo/simulator.hpp"

namespace ggo {

struct EvalReport {
  std::vector<SimResult> runs;       // ordered by seed
  std::vector<double> wall_seconds;  // per run, same order
  int successful = 0;
  double success_rate = 0.0;
  double mean_throughput = 0.0;  // over successful runs
  double std_error = 0.0;        // sample stddev / sqrt(successful); 0 for fewer than 2
  double mean_wall_seconds = 0.0;
  nlohmann::json config;
};

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error of `values`; standard error is 0 for n < 2.
Summary summarize(const std::vector<double>& values);

/// Runs seeds sim.seed .. sim.seed + runs - 1 on up to `threads` workers.
/// Distance maps for every goal are computed once and shared.
EvalReport evaluate(const GuidanceGraph& g, const SimConfig& sim, int runs, int threads = 0);

/// Report without wall times, so identical inputs give identical files.
/// `include_usage` adds the per-run usage arrays.
nlohmann::json report_to_json(const EvalReport& r, bool include_usage = false);
nlohmann::json timings_to_json(const EvalReport& r);

/// Mean fraction of timesteps each tile was occupied, h x w, averaged over
/// all runs. Sums to the number of agents.
std::vector<std::vector<double>> tile_usage_grid(const EvalReport& r, const GridMap& map);

/// Writes tile_usage.csv, edge_usage.csv and heatmaps.json into `out_dir`.
void export_heatmaps(const EvalReport& r, const EdgeIndexer& indexer,
                     const std::filesystem::path& out_dir);

}  // namespace ggo
