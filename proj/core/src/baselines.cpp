#include "ggo/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ggo/error.hpp"
#include "ggo/planner.hpp"
#include "ggo/rng.hpp"

namespace ggo {

namespace {

constexpr int kMaxConsecutiveResamples = 10000;

struct Usage {
  std::vector<std::int64_t> vertex;
  std::vector<std::int64_t> edge;
};

// Draws (s, g) with s != g and a path between them, plans on `g_now`, and
// adds the path to `usage`.
void sample_and_accumulate(const GuidanceGraph& g_now, const TaskSets& tasks, Rng& rng,
                           Usage& usage, std::size_t& resampled) {
  const EdgeIndexer& idx = g_now.indexer();
  for (int attempt = 0;; ++attempt) {
    if (attempt >= kMaxConsecutiveResamples) {
      throw NoPathError("no connected start/goal pair found after " +
                        std::to_string(kMaxConsecutiveResamples) + " draws");
    }
    const VertexId s = tasks.starts[static_cast<std::size_t>(rng.below(tasks.starts.size()))];
    const VertexId g = tasks.goals[static_cast<std::size_t>(rng.below(tasks.goals.size()))];
    if (s == g) {
      ++resampled;
      continue;
    }
    std::vector<VertexId> path;
    try {
      path = plan_path(g_now, s, g);
    } catch (const NoPathError&) {
      ++resampled;
      continue;
    }
    for (std::size_t i = 0; i < path.size(); ++i) {
      ++usage.vertex[static_cast<std::size_t>(path[i])];
      if (i > 0) ++usage.edge[static_cast<std::size_t>(idx.edge_between(path[i - 1], path[i]))];
    }
    return;
  }
}

void check_sampling_sets(const TaskSets& tasks) {
  if (tasks.starts.empty() || tasks.goals.empty()) {
    throw EmptyGoalSetError("baseline generation needs non-empty start and goal sets");
  }
  if (tasks.starts.size() == 1 && tasks.goals.size() == 1 && tasks.starts[0] == tasks.goals[0]) {
    throw EmptyGoalSetError("start and goal sets hold the same single vertex");
  }
}

}  // namespace

std::string_view to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::Unweighted:
      return "unweighted";
    case BaselineMethod::Crisscross:
      return "crisscross";
    case BaselineMethod::TrafficFlow:
      return "traffic-flow";
    case BaselineMethod::HmCost:
      return "hm-cost";
  }
  return "unknown";
}

BaselineMethod parse_baseline_method(std::string_view text) {
  for (auto m : {BaselineMethod::Unweighted, BaselineMethod::Crisscross,
                 BaselineMethod::TrafficFlow, BaselineMethod::HmCost}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown baseline method '" + std::string(text) + "'");
}

GuidanceGraph unweighted(std::shared_ptr<const EdgeIndexer> indexer) {
  return GuidanceGraph::uniform(std::move(indexer), 1.0);
}

GuidanceGraph crisscross(std::shared_ptr<const EdgeIndexer> indexer) {
  const EdgeIndexer& idx = *indexer;
  std::vector<double> w(idx.num_edges(), 1.0);
  for (std::size_t e = idx.num_wait_edges(); e < idx.num_edges(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    const Cell c = idx.map().cell(idx.source(id));
    bool chosen = false;
    switch (idx.action(id)) {
      case Action::Right:
        chosen = c.row % 2 == 0;
        break;
      case Action::Left:
        chosen = c.row % 2 == 1;
        break;
      case Action::Up:
        chosen = c.col % 2 == 0;
        break;
      case Action::Down:
        chosen = c.col % 2 == 1;
        break;
      case Action::Wait:
        break;
    }
    if (chosen) w[e] = 0.5;
  }
  return GuidanceGraph(std::move(indexer), std::move(w));
}

double traffic_flow_edge_weight(std::int64_t forward_usage, std::int64_t backward_usage,
                                std::int64_t head_vertex_usage) {
  // ceil((U - 1) / 2) for U >= 0 equals U / 2 in integer division.
  const std::int64_t p = head_vertex_usage / 2;
  const std::int64_t c = forward_usage * backward_usage;
  return 1.0 + static_cast<double>(c) + static_cast<double>(p);
}

GuidanceGraph traffic_flow(std::shared_ptr<const EdgeIndexer> indexer, const TaskSets& tasks,
                           const BaselineParams& params, std::size_t* resampled) {
  if (params.n_base < 0) throw ConfigError("n_base must be non-negative");
  const EdgeIndexer& idx = *indexer;
  std::vector<double> w(idx.num_edges(), 1.0);
  std::size_t redrawn = 0;
  if (params.n_base > 0) {
    check_sampling_sets(tasks);
    Usage usage{std::vector<std::int64_t>(idx.num_vertices(), 0),
                std::vector<std::int64_t>(idx.num_edges(), 0)};
    Rng rng(derive_seed(params.seed, {2}));
    for (int it = 0; it < params.n_base; ++it) {
      const GuidanceGraph current(indexer, w);
      sample_and_accumulate(current, tasks, rng, usage, redrawn);
      for (std::size_t e = idx.num_wait_edges(); e < idx.num_edges(); ++e) {
        const auto id = static_cast<EdgeId>(e);
        w[e] = traffic_flow_edge_weight(usage.edge[e],
                                        usage.edge[static_cast<std::size_t>(idx.reverse(id))],
                                        usage.vertex[static_cast<std::size_t>(idx.target(id))]);
      }
    }
  }
  if (resampled != nullptr) *resampled = redrawn;
  return GuidanceGraph(std::move(indexer), std::move(w));
}

double hm_edge_cost(double forward_usage, double backward_usage, const BaselineParams& params) {
  const double n = params.n_base;
  const double p = params.alpha * forward_usage / n;
  const double t = params.beta * backward_usage / n;
  const double s = std::pow(params.gamma, (forward_usage + backward_usage) / (2.0 * n));
  return 1.0 - p + t + s;
}

GuidanceGraph hm_cost(std::shared_ptr<const EdgeIndexer> indexer, const TaskSets& tasks,
                      const BaselineParams& params, std::size_t* resampled) {
  if (params.n_base < 1) throw ConfigError("hm-cost needs n_base >= 1");
  if (!(params.gamma > 0.0)) throw ConfigError("gamma must be positive");
  check_sampling_sets(tasks);
  const EdgeIndexer& idx = *indexer;
  const std::size_t first_move = idx.num_wait_edges();

  std::vector<double> cost(idx.num_edges(), 1.0);
  for (std::size_t e = first_move; e < idx.num_edges(); ++e) cost[e] = hm_edge_cost(0, 0, params);

  Usage usage{std::vector<std::int64_t>(idx.num_vertices(), 0),
              std::vector<std::int64_t>(idx.num_edges(), 0)};
  Rng rng(derive_seed(params.seed, {2}));
  std::size_t redrawn = 0;
  for (int it = 0; it < params.n_base; ++it) {
    const GuidanceGraph current(indexer, cost);
    sample_and_accumulate(current, tasks, rng, usage, redrawn);
    for (std::size_t e = first_move; e < idx.num_edges(); ++e) {
      const auto back = static_cast<std::size_t>(idx.reverse(static_cast<EdgeId>(e)));
      cost[e] = hm_edge_cost(static_cast<double>(usage.edge[e]),
                             static_cast<double>(usage.edge[back]), params);
    }
  }

  std::vector<EdgeId> order(idx.num_move_edges());
  std::iota(order.begin(), order.end(), static_cast<EdgeId>(first_move));
  std::stable_sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    return cost[static_cast<std::size_t>(a)] < cost[static_cast<std::size_t>(b)];
  });
  const std::size_t num_candidates = std::min(idx.num_edges() / 7, order.size());
  order.resize(num_candidates);

  // Partial Fisher-Yates over the candidate set.
  const std::size_t num_highway = num_candidates / 5;
  Rng pick(derive_seed(params.seed, {3}));
  for (std::size_t k = 0; k < num_highway; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(pick.below(num_candidates - k));
    std::swap(order[k], order[j]);
  }

  std::vector<double> w(idx.num_edges(), 1.0);
  for (std::size_t k = 0; k < num_highway; ++k) w[static_cast<std::size_t>(order[k])] = 0.5;
  if (resampled != nullptr) *resampled = redrawn;
  return GuidanceGraph(std::move(indexer), std::move(w));
}

GuidanceGraph make_baseline(BaselineMethod method, std::shared_ptr<const EdgeIndexer> indexer,
                            TaskMode mode, const BaselineParams& params) {
  switch (method) {
    case BaselineMethod::Unweighted:
      return unweighted(std::move(indexer));
    case BaselineMethod::Crisscross:
      return crisscross(std::move(indexer));
    case BaselineMethod::TrafficFlow: {
      const TaskSets tasks = TaskSets::build(indexer->map(), mode);
      return traffic_flow(std::move(indexer), tasks, params);
    }
    case BaselineMethod::HmCost: {
      const TaskSets tasks = TaskSets::build(indexer->map(), mode);
      return hm_cost(std::move(indexer), tasks, params);
    }
  }
  throw ConfigError("unknown baseline method");
}

}  // namespace ggo
