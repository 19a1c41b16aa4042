#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ggo/cmaes.hpp"
#include "ggo/guidance.hpp"
#include "ggo/simulator.hpp"
#include "ggo/update_model.hpp"

namespace ggo {

struct PiuConfig {
  int iterations = 5;  // N_p
  int sims = 1;        // N_e_piu
  SimConfig sim;
  WeightBounds bounds;
  UpdateModelArch arch;
  int threads = 1;  // workers for the sims of one iteration
};

using Simulator = std::function<SimResult(const GuidanceGraph&, const SimConfig&)>;

struct PiuOutcome {
  double throughput = 0.0;  // mean over the final iteration's sims
  GuidanceGraph graph;
};

/// Per-edge usage averaged over runs, each run divided by
/// num_agents * steps_executed.
std::vector<double> normalized_usage(std::span<const SimResult> runs);

/// Iterative update: ω = 1 first, then ω = forward(θ, ω, usage) from the
/// previous iteration's usage. Simulation seeds are
/// derive_seed(cfg.sim.seed, {iteration, run}). `simulate` defaults to
/// run_simulation.
PiuOutcome piu_run(std::span<const double> theta, std::shared_ptr<const EdgeIndexer> indexer,
                   const PiuConfig& cfg, const Simulator& simulate = {});

/// Final guidance graph of piu_run with a single sim per iteration.
GuidanceGraph generate_guidance(std::span<const double> theta,
                                std::shared_ptr<const EdgeIndexer> indexer, const PiuConfig& cfg);

struct PiuTrainResult {
  UpdateModel model;
  double best_throughput = 0.0;
  GuidanceGraph best_graph;
  std::vector<GenerationRecord> history;
};

/// CMA-ES over θ (unbounded) starting from θ = 0. Candidate k of
/// generation g runs piu_run with sim seed derive_seed(cma.seed, {g, k}).
/// cma.sigma0 <= 0 selects 0.5; cma.evals and bounds fields are unused.
PiuTrainResult optimize_update_model(std::shared_ptr<const EdgeIndexer> indexer,
                                     const PiuConfig& cfg, const CmaesConfig& cma,
                                     const GenerationCallback& on_generation = {});

}  // namespace ggo
