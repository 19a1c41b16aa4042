#include <benchmark/benchmark.h>

#include "ggo/baselines.hpp"
#include "ggo/planner.hpp"
#include "ggo/simulator.hpp"
#include "ggo/update_model.hpp"

namespace {

std::shared_ptr<const ggo::EdgeIndexer> random32() {
  static const auto idx =
      ggo::build_edge_indexer(ggo::load_map(std::string(GGO_MAPS_DIR) + "/random-32-32-20-gen.map"));
  return idx;
}

void BM_DistanceMap(benchmark::State& state) {
  const auto idx = random32();
  const ggo::GuidanceGraph g = ggo::GuidanceGraph::uniform(idx);
  ggo::VertexId goal = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ggo::distance_map(g, goal));
    goal = (goal + 97) % static_cast<ggo::VertexId>(idx->num_vertices());
  }
}
BENCHMARK(BM_DistanceMap);

// Full simulation; the first steps include distance-map fills.
void BM_Simulation(benchmark::State& state) {
  const auto idx = random32();
  const ggo::GuidanceGraph g = ggo::GuidanceGraph::uniform(idx);
  ggo::DistanceCache cache(g);
  cache.warm(ggo::TaskSets::build(idx->map(), ggo::TaskMode::UniformRandom).goals);
  ggo::SimConfig cfg;
  cfg.num_agents = static_cast<int>(state.range(0));
  cfg.timesteps = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ggo::run_simulation(g, cfg, &cache));
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * cfg.timesteps);
}
BENCHMARK(BM_Simulation)->Arg(50)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_UpdateModelForward(benchmark::State& state) {
  const auto idx = random32();
  const ggo::UpdateModelArch arch;
  std::vector<double> theta(ggo::parameter_count(arch));
  ggo::Rng rng(1);
  for (double& x : theta) x = 0.3 * rng.normal();
  const ggo::WeightTensor w = ggo::vector_to_tensor(ggo::GuidanceGraph::uniform(idx));
  std::vector<double> usage(idx->num_edges());
  for (double& u : usage) u = rng.uniform();
  const ggo::Tensor3 u = ggo::vector_to_tensor(*idx, usage);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ggo::forward(theta, arch, *idx, w, u, ggo::WeightBounds{}));
  }
}
BENCHMARK(BM_UpdateModelForward)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
