#pragma once

#include <cstdint>
#include <memory>
#include <string_view>

#include "ggo/guidance.hpp"
#include "ggo/simulator.hpp"

namespace ggo {

struct BaselineParams {
  int n_base = 10000;
  double alpha = 0.5;  // follow preference
  double beta = 1.2;   // interference
  double gamma = 1.3;  // saturation
  std::uint64_t seed = 0;
};

enum class BaselineMethod { Unweighted, Crisscross, TrafficFlow, HmCost };

std::string_view to_string(BaselineMethod m);
BaselineMethod parse_baseline_method(std::string_view text);

/// ω = 1 everywhere.
GuidanceGraph unweighted(std::shared_ptr<const EdgeIndexer> indexer);

/// 0.5 on right-edges in even rows, left-edges in odd rows, up-edges in even
/// columns and down-edges in odd columns (0-based parity); 1 elsewhere,
/// including every wait edge.
GuidanceGraph crisscross(std::shared_ptr<const EdgeIndexer> indexer);

/// Iterative congestion pricing. Each of n_base iterations samples a start
/// from tasks.starts and a distinct goal from tasks.goals, plans on the
/// current weights, adds the path to vertex/edge usage, then sets every
/// movement edge (u, v) to 1 + U(u,v)·U(v,u) + ceil((U(v) - 1) / 2).
/// Wait edges stay 1. Disconnected samples are redrawn; `resampled`, when
/// non-null, receives how many were redrawn.
GuidanceGraph traffic_flow(std::shared_ptr<const EdgeIndexer> indexer, const TaskSets& tasks,
                           const BaselineParams& params, std::size_t* resampled = nullptr);

/// Highway selection from HM costs
///   c(u,v) = 1 - α U(u,v)/N + β U(v,u)/N + γ^((U(u,v) + U(v,u)) / 2N)
/// used as interim weights while sampling n_base paths (N = n_base). The
/// floor(|E_g|/7) movement edges of lowest cost (ties by edge id) form the
/// candidate set; a seeded uniform sample of floor(size/5) of those get
/// weight 0.5 and every other edge 1. n_base must be at least 1.
GuidanceGraph hm_cost(std::shared_ptr<const EdgeIndexer> indexer, const TaskSets& tasks,
                      const BaselineParams& params, std::size_t* resampled = nullptr);

/// HM cost of one edge given its usage counts.
double hm_edge_cost(double forward_usage, double backward_usage, const BaselineParams& params);

/// Traffic-flow weight of edge (u, v).
double traffic_flow_edge_weight(std::int64_t forward_usage, std::int64_t backward_usage,
                                std::int64_t head_vertex_usage);

GuidanceGraph make_baseline(BaselineMethod method, std::shared_ptr<const EdgeIndexer> indexer,
                            TaskMode mode, const BaselineParams& params);

}  // namespace ggo
