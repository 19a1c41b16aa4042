#include "ggo/planner.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "ggo/error.hpp"
#include "ggo/parallel.hpp"

namespace ggo {

namespace {

using QueueEntry = std::pair<double, VertexId>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

// Single-source Dijkstra. `reversed` relaxes u <- v over edge (u, v) so the
// result is cost-to-go toward `root`. Stops once `stop_at` is settled.
std::vector<double> dijkstra(const GuidanceGraph& g, VertexId root, bool reversed,
                             VertexId stop_at = kNoVertex) {
  const EdgeIndexer& idx = g.indexer();
  std::vector<double> dist(idx.num_vertices(), kInfinity);
  std::vector<char> done(idx.num_vertices(), 0);
  MinQueue queue;
  dist[static_cast<std::size_t>(root)] = 0.0;
  queue.emplace(0.0, root);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (done[static_cast<std::size_t>(v)]) continue;
    done[static_cast<std::size_t>(v)] = 1;
    if (v == stop_at) break;
    for (Action a : kMoves) {
      const EdgeId e = idx.edge(v, a);
      if (e == kNoEdge) continue;
      const VertexId u = idx.target(e);
      if (done[static_cast<std::size_t>(u)]) continue;
      const double w = reversed ? g.weight(idx.reverse(e)) : g.weight(e);
      const double nd = d + w;
      if (nd < dist[static_cast<std::size_t>(u)]) {
        dist[static_cast<std::size_t>(u)] = nd;
        queue.emplace(nd, u);
      }
    }
  }
  return dist;
}

}  // namespace

DistanceMap distance_map(const GuidanceGraph& g, VertexId goal) {
  if (goal < 0 || static_cast<std::size_t>(goal) >= g.indexer().num_vertices()) {
    throw ConfigError("goal vertex " + std::to_string(goal) + " out of range");
  }
  return DistanceMap(goal, dijkstra(g, goal, /*reversed=*/true));
}

std::vector<VertexId> plan_path(const GuidanceGraph& g, VertexId start, VertexId goal) {
  const EdgeIndexer& idx = g.indexer();
  const auto nv = static_cast<VertexId>(idx.num_vertices());
  if (start < 0 || start >= nv || goal < 0 || goal >= nv) {
    throw ConfigError("plan_path: vertex out of range");
  }
  if (start == goal) return {start};

  const std::vector<double> dist = dijkstra(g, start, /*reversed=*/false, goal);
  if (dist[static_cast<std::size_t>(goal)] == kInfinity) {
    throw NoPathError("no path from vertex " + std::to_string(start) + " to vertex " +
                      std::to_string(goal));
  }

  std::vector<VertexId> path{goal};
  VertexId v = goal;
  while (v != start) {
    VertexId best = kNoVertex;
    for (Action a : kMoves) {
      const EdgeId out = idx.edge(v, a);
      if (out == kNoEdge) continue;
      const VertexId u = idx.target(out);
      const double du = dist[static_cast<std::size_t>(u)];
      if (du == kInfinity) continue;
      if (du + g.weight(idx.reverse(out)) == dist[static_cast<std::size_t>(v)] &&
          (best == kNoVertex || u < best)) {
        best = u;
      }
    }
    path.push_back(best);
    v = best;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double path_cost(const GuidanceGraph& g, std::span<const VertexId> path) {
  double cost = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const EdgeId e = g.indexer().edge_between(path[i - 1], path[i]);
    if (e == kNoEdge) throw ConfigError("path contains a non-adjacent step");
    cost += g.weight(e);
  }
  return cost;
}

DistanceCache::DistanceCache(const GuidanceGraph& g)
    : graph_(&g), maps_(g.indexer().num_vertices()) {}

const DistanceMap& DistanceCache::get(VertexId goal) {
  auto& slot = maps_[static_cast<std::size_t>(goal)];
  if (!slot) slot = std::make_unique<DistanceMap>(distance_map(*graph_, goal));
  return *slot;
}

void DistanceCache::warm(std::span<const VertexId> goals, int threads) {
  std::vector<VertexId> missing;
  for (VertexId v : goals) {
    if (!maps_[static_cast<std::size_t>(v)]) missing.push_back(v);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  // Distinct slots per index, so workers never touch the same element.
  parallel_for(missing.size(), threads, [&](std::size_t i) {
    const VertexId v = missing[i];
    maps_[static_cast<std::size_t>(v)] = std::make_unique<DistanceMap>(distance_map(*graph_, v));
  });
}

}  // namespace ggo
