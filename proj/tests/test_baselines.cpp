#include <doctest.h>

#include <cmath>

#include "ggo/baselines.hpp"
#include "ggo/error.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ggo;

namespace {

std::vector<double> as_vector(const GuidanceGraph& g) {
  return {g.weights().begin(), g.weights().end()};
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("unweighted") {
  const auto idx = build_edge_indexer(load_map(test::maps_dir() / "warehouse-33-36.map"));
  const GuidanceGraph g = unweighted(idx);
  CHECK(g.weights().size() == 4074);
  for (double w : g.weights()) CHECK(w == 1.0);
}

TEST_CASE("crisscross on a free two-by-two map") {
  const auto idx = test::free_indexer(2, 2);
  const GuidanceGraph g = crisscross(idx);
  const GridMap& m = idx->map();
  auto w = [&](Cell a, Cell b) { return g.weight(idx->edge_between(m.vertex(a), m.vertex(b))); };
  CHECK(w({0, 0}, {0, 1}) == 0.5);
  CHECK(w({1, 1}, {1, 0}) == 0.5);
  CHECK(w({1, 0}, {0, 0}) == 0.5);
  CHECK(w({0, 1}, {1, 1}) == 0.5);
  CHECK(w({0, 1}, {0, 0}) == 1.0);
  CHECK(w({1, 0}, {1, 1}) == 1.0);
  CHECK(w({0, 0}, {1, 0}) == 1.0);
  CHECK(w({1, 1}, {0, 1}) == 1.0);
  for (VertexId v = 0; v < 4; ++v) CHECK(g.weight(idx->wait_edge(v)) == 1.0);
}

TEST_CASE("crisscross parity rules on a larger map") {
  const auto idx = build_edge_indexer(generate_scaled_warehouse(2, 3));
  const GuidanceGraph g = crisscross(idx);
  for (EdgeId e = 0; e < static_cast<EdgeId>(idx->num_edges()); ++e) {
    const Cell c = idx->map().cell(idx->source(e));
    bool chosen = false;
    switch (idx->action(e)) {
      case Action::Right: chosen = c.row % 2 == 0; break;
      case Action::Left: chosen = c.row % 2 == 1; break;
      case Action::Up: chosen = c.col % 2 == 0; break;
      case Action::Down: chosen = c.col % 2 == 1; break;
      case Action::Wait: break;
    }
    CHECK(g.weight(e) == (chosen ? 0.5 : 1.0));
  }
}

TEST_CASE("traffic-flow formula") {
  CHECK(traffic_flow_edge_weight(2, 1, 3) == 4.0);
  CHECK(traffic_flow_edge_weight(0, 0, 0) == 1.0);
  CHECK(traffic_flow_edge_weight(0, 5, 1) == 1.0);
  CHECK(traffic_flow_edge_weight(3, 3, 4) == 1.0 + 9.0 + 2.0);
}

TEST_CASE("hm-cost formula") {
  const BaselineParams p;
  CHECK(hm_edge_cost(0, 0, p) == 2.0);
  CHECK(hm_edge_cost(p.n_base, 0, p) == doctest::Approx(1.0 - 0.5 + std::sqrt(1.3)).epsilon(1e-15));
  CHECK(hm_edge_cost(p.n_base, 0, p) == doctest::Approx(1.640).epsilon(1e-3));
}

TEST_CASE("traffic-flow with no iterations is unweighted") {
  const auto idx = test::free_indexer(3, 3);
  BaselineParams p;
  p.n_base = 0;
  const TaskSets t = TaskSets::build(idx->map(), TaskMode::UniformRandom);
  CHECK(as_vector(traffic_flow(idx, t, p)) == as_vector(unweighted(idx)));
}

TEST_CASE("traffic-flow single path on a corridor") {
  // One path uses each vertex at most once and each edge in one direction,
  // so every weight stays 1.
  const auto idx = test::free_indexer(1, 4);
  BaselineParams p;
  p.n_base = 1;
  p.seed = 2;
  const TaskSets t = TaskSets::build(idx->map(), TaskMode::UniformRandom);
  const GuidanceGraph g = traffic_flow(idx, t, p);
  for (double w : g.weights()) CHECK(w == 1.0);
}

TEST_CASE("traffic-flow and hm-cost match the reference on a free four-by-four map") {
  const auto idx = test::free_indexer(4, 4);
  const TaskSets t = TaskSets::build(idx->map(), TaskMode::UniformRandom);
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 42ULL, 1234567ULL}) {
    BaselineParams p;
    p.n_base = 3;
    p.seed = seed;
    CHECK(as_vector(traffic_flow(idx, t, p)) == oracle::traffic_flow(4, 4, 3, seed));
    CHECK(as_vector(hm_cost(idx, t, p)) ==
          oracle::hm_cost(4, 4, 3, p.alpha, p.beta, p.gamma, seed));
  }
  // Longer runs exercise nonzero contraflow and head penalties.
  BaselineParams p;
  p.n_base = 40;
  p.seed = 9;
  CHECK(as_vector(traffic_flow(idx, t, p)) == oracle::traffic_flow(4, 4, 40, 9));
  CHECK(as_vector(hm_cost(idx, t, p)) == oracle::hm_cost(4, 4, 40, p.alpha, p.beta, p.gamma, 9));
}

TEST_CASE("hm-cost highway count") {
  const auto idx = build_edge_indexer(generate_random_map(12, 12, 20, 5));
  const TaskSets t = TaskSets::build(idx->map(), TaskMode::UniformRandom);
  BaselineParams p;
  p.n_base = 50;
  const GuidanceGraph g = hm_cost(idx, t, p);
  std::size_t half = 0;
  for (EdgeId e = 0; e < static_cast<EdgeId>(idx->num_edges()); ++e) {
    if (g.weight(e) == 0.5) {
      ++half;
      CHECK_FALSE(idx->is_wait(e));
    } else {
      CHECK(g.weight(e) == 1.0);
    }
  }
  CHECK(half == idx->num_edges() / 7 / 5);
  CHECK(as_vector(hm_cost(idx, t, p)) == as_vector(g));
  p.n_base = 0;
  CHECK_THROWS_AS(hm_cost(idx, t, p), ConfigError);
  p.n_base = 5;
  p.gamma = 0.0;
  CHECK_THROWS_AS(hm_cost(idx, t, p), ConfigError);
}

TEST_CASE("generators are deterministic and positive") {
  const auto idx = build_edge_indexer(generate_random_map(10, 10, 15, 1));
  const TaskSets t = TaskSets::build(idx->map(), TaskMode::UniformRandom);
  BaselineParams p;
  p.n_base = 60;
  p.seed = 3;
  const auto a = as_vector(traffic_flow(idx, t, p));
  CHECK(a == as_vector(traffic_flow(idx, t, p)));
  for (double w : a) CHECK(w >= 1.0);
  p.seed = 4;
  CHECK(a != as_vector(traffic_flow(idx, t, p)));
}

TEST_CASE("disconnected samples are redrawn") {
  const auto idx = test::indexer({"..@..", "..@.."});
  const TaskSets t = TaskSets::build(idx->map(), TaskMode::UniformRandom);
  BaselineParams p;
  p.n_base = 30;
  std::size_t redrawn = 0;
  traffic_flow(idx, t, p, &redrawn);
  CHECK(redrawn > 0);
}

TEST_CASE("method names and dispatch") {
  for (auto m : {BaselineMethod::Unweighted, BaselineMethod::Crisscross,
                 BaselineMethod::TrafficFlow, BaselineMethod::HmCost}) {
    CHECK(parse_baseline_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_baseline_method("gm"), ConfigError);
  const auto idx = test::free_indexer(3, 3);
  BaselineParams p;
  p.n_base = 5;
  CHECK(as_vector(make_baseline(BaselineMethod::Crisscross, idx, TaskMode::UniformRandom, p)) ==
        as_vector(crisscross(idx)));
  CHECK_THROWS_AS(make_baseline(BaselineMethod::HmCost, idx, TaskMode::WarehouseAlternating, p),
                  EmptyGoalSetError);
}

}  // TEST_SUITE
