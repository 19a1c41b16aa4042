#include "ggo/piu.hpp"

#include <string>

#include "ggo/error.hpp"
#include "ggo/parallel.hpp"

namespace ggo {

std::vector<double> normalized_usage(std::span<const SimResult> runs) {
  if (runs.empty()) return {};
  std::vector<double> out(runs.front().edge_usage.size(), 0.0);
  for (const SimResult& r : runs) {
    const double denom = static_cast<double>(r.num_agents) * static_cast<double>(r.steps_executed);
    if (denom <= 0.0) continue;
    for (std::size_t e = 0; e < out.size(); ++e) {
      out[e] += static_cast<double>(r.edge_usage[e]) / denom;
    }
  }
  for (double& u : out) u /= static_cast<double>(runs.size());
  return out;
}

PiuOutcome piu_run(std::span<const double> theta, std::shared_ptr<const EdgeIndexer> indexer,
                   const PiuConfig& cfg, const Simulator& simulate) {
  if (cfg.iterations < 1) throw ConfigError("PIU needs at least one iteration");
  if (cfg.sims < 1) throw ConfigError("PIU needs at least one simulation per iteration");
  if (theta.size() != parameter_count(cfg.arch)) {
    throw ConfigError("theta has " + std::to_string(theta.size()) + " entries, architecture needs " +
                      std::to_string(parameter_count(cfg.arch)));
  }
  const Simulator sim = simulate ? simulate : Simulator([](const GuidanceGraph& g, const SimConfig& c) {
    return run_simulation(g, c);
  });

  GuidanceGraph graph = GuidanceGraph::uniform(indexer, 1.0);
  std::vector<SimResult> runs(static_cast<std::size_t>(cfg.sims));
  double throughput = 0.0;
  for (int it = 0; it < cfg.iterations; ++it) {
    if (it > 0) {
      const std::vector<double> usage = normalized_usage(runs);
      const WeightTensor w = forward(theta, cfg.arch, *indexer, vector_to_tensor(graph),
                                     vector_to_tensor(*indexer, usage), cfg.bounds);
      graph = GuidanceGraph(indexer, tensor_to_vector(w, *indexer));
    }
    parallel_for(runs.size(), cfg.threads, [&](std::size_t run) {
      SimConfig c = cfg.sim;
      c.seed = derive_seed(cfg.sim.seed, {static_cast<std::uint64_t>(it), run});
      runs[run] = sim(graph, c);
    });
    throughput = 0.0;
    for (const SimResult& r : runs) throughput += r.throughput;
    throughput /= static_cast<double>(runs.size());
  }
  return PiuOutcome{throughput, std::move(graph)};
}

GuidanceGraph generate_guidance(std::span<const double> theta,
                                std::shared_ptr<const EdgeIndexer> indexer, const PiuConfig& cfg) {
  PiuConfig c = cfg;
  c.sims = 1;
  return piu_run(theta, std::move(indexer), c).graph;
}

PiuTrainResult optimize_update_model(std::shared_ptr<const EdgeIndexer> indexer,
                                     const PiuConfig& cfg, const CmaesConfig& cma,
                                     const GenerationCallback& on_generation) {
  const std::size_t n = parameter_count(cfg.arch);
  PiuConfig inner = cfg;
  inner.threads = 1;  // parallelism is across candidates

  std::unique_ptr<GuidanceGraph> best_graph;
  double best_f = 0.0;
  const BatchObjective objective = [&](int gen, const std::vector<Eigen::VectorXd>& xs) {
    std::vector<double> f(xs.size(), 0.0);
    std::vector<std::unique_ptr<GuidanceGraph>> graphs(xs.size());
    parallel_for(xs.size(), cma.threads, [&](std::size_t k) {
      PiuConfig c = inner;
      c.sim.seed = derive_seed(cma.seed, {static_cast<std::uint64_t>(gen), k});
      PiuOutcome out = piu_run(
          std::span<const double>(xs[k].data(), static_cast<std::size_t>(xs[k].size())), indexer,
          c);
      f[k] = out.throughput;
      graphs[k] = std::make_unique<GuidanceGraph>(std::move(out.graph));
    });
    // Same strict-improvement rule as the search loop's best-ever tracking.
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (!best_graph || f[k] > best_f) {
        best_f = f[k];
        best_graph = std::move(graphs[k]);
      }
    }
    return f;
  };

  SearchConfig sc;
  sc.batch = cma.batch;
  sc.iterations = cma.iterations;
  sc.elites = cma.elites;
  sc.sigma0 = cma.sigma0 > 0.0 ? cma.sigma0 : 0.5;
  sc.seed = cma.seed;
  SearchResult sr =
      maximize(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), sc, objective, on_generation);

  PiuTrainResult result{
      UpdateModel{cfg.arch, std::vector<double>(sr.best.data(), sr.best.data() + sr.best.size())},
      sr.best_value, std::move(*best_graph), std::move(sr.history)};
  return result;
}

}  // namespace ggo
