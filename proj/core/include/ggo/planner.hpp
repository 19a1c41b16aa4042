#pragma once

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "ggo/guidance.hpp"

namespace ggo {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Cost-to-go to a single goal over movement edges of a guidance graph.
/// Wait edges never enter; unreachable vertices hold kInfinity.
class DistanceMap {
 public:
  DistanceMap(VertexId goal, std::vector<double> cost) : goal_(goal), cost_(std::move(cost)) {}

  VertexId goal() const { return goal_; }
  double operator[](VertexId v) const { return cost_[static_cast<std::size_t>(v)]; }
  std::span<const double> costs() const { return cost_; }

 private:
  VertexId goal_;
  std::vector<double> cost_;
};

/// Dijkstra over reversed movement edges rooted at `goal`.
DistanceMap distance_map(const GuidanceGraph& g, VertexId goal);

/// Cost-minimal start->goal vertex sequence over movement edges. Among
/// equal-cost paths, the one whose predecessor chain (walked back from the
/// goal) picks the smallest vertex id at every step. Throws NoPathError.
std::vector<VertexId> plan_path(const GuidanceGraph& g, VertexId start, VertexId goal);

/// Sum of movement-edge weights along `path` (0 for a single vertex).
double path_cost(const GuidanceGraph& g, std::span<const VertexId> path);

/// Distance maps keyed by goal vertex.
///
/// get() fills missing entries lazily and is single-writer. After warm()
/// has covered every goal that will be requested, find() is a const,
/// lock-free read and the cache may be shared between threads.
class DistanceCache {
 public:
  explicit DistanceCache(const GuidanceGraph& g);

  const DistanceMap& get(VertexId goal);
  const DistanceMap* find(VertexId goal) const {
    return maps_[static_cast<std::size_t>(goal)].get();
  }
  void warm(std::span<const VertexId> goals, int threads = 1);
  const GuidanceGraph& graph() const { return *graph_; }

 private:
  const GuidanceGraph* graph_;
  std::vector<std::unique_ptr<DistanceMap>> maps_;
};

}  // namespace ggo
