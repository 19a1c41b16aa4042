#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggo/guidance.hpp"
#include "ggo/planner.hpp"
#include "ggo/rng.hpp"

namespace ggo {

/// How PIBT orders candidates with equal or near-equal score.
enum class TieBreak {
  VertexId,  // smallest target vertex id
  Seeded,    // scores jittered by a hash of (run seed, step, agent, vertex) in [0, mean weight)
};

std::string_view to_string(TieBreak t);
TieBreak parse_tie_break(std::string_view s);

struct SimConfig {
  int num_agents = 1;
  int timesteps = 1000;
  std::uint64_t seed = 0;
  TaskMode task_mode = TaskMode::UniformRandom;
  bool congestion_stop = false;
  /// PIBT swap emulation for corridors and dead ends (see pibt_step).
  bool swap = true;
  TieBreak tie_break = TieBreak::Seeded;
};

/// Start tiles and goal pools for one (map, mode) pair.
struct TaskSets {
  TaskMode mode = TaskMode::UniformRandom;
  std::vector<VertexId> starts;
  std::vector<VertexId> goals;         // union of every goal pool
  std::vector<VertexId> endpoints;     // alternating / endpoint modes
  std::vector<VertexId> workstations;  // alternating mode

  /// Throws EmptyGoalSetError when the map lacks the tiles the mode needs.
  static TaskSets build(const GridMap& map, TaskMode mode);
};

struct AgentState {
  int id = 0;
  VertexId position = kNoVertex;
  VertexId goal = kNoVertex;
  /// Timesteps since the last reached goal plus the fixed tie-break epsilon.
  double priority = 0.0;
  double epsilon = 0.0;
  std::int64_t goals_reached = 0;
  /// Kind of the current goal in alternating mode (Endpoint or Workstation).
  TileKind phase = TileKind::Workstation;
};

/// Per-agent goal stream: goals for agent i are drawn from
/// Rng(derive_seed(seed, {1, i})); placement and epsilons use
/// Rng(derive_seed(seed, {0})).
Rng agent_goal_rng(std::uint64_t seed, int agent_id);

/// Distinct starts drawn uniformly without replacement from the mode's start
/// set; each agent gets an initial goal from assign_goal().
std::vector<AgentState> init_agents(const TaskSets& tasks, const SimConfig& cfg,
                                    std::vector<Rng>& goal_rngs);

/// Draws a new goal != agent.position and updates agent.goal / phase.
///
/// UniformRandom and WarehouseEndpoints draw from their single pool.
/// WarehouseAlternating draws from the pool opposite to `phase`
/// (phase Endpoint -> Workstation) and flips phase; if that pool holds only
/// the agent's own tile, the other pool is used instead.
VertexId assign_goal(AgentState& agent, const TaskSets& tasks, Rng& rng);

/// One PIBT step. Returns the next vertex of every agent (indexed like
/// `agents`). Candidates a ∈ {wait, moves} are ranked by
/// ω(a) + cost-to-go(target(a)), lower first. With VertexId ties equal
/// scores go to the smaller target vertex id. With Seeded ties every score
/// gets a jitter in [0, mean ω) hashed from `tie_seed`, step, agent and
/// vertex.
/// Agents are served in decreasing priority; a higher-priority agent that
/// claims an occupied vertex makes its occupant plan next with priority
/// inheritance, and backtracks when that occupant cannot move.
///
/// With `swap`, an agent whose best neighbour is held by an agent it can
/// only trade places with through a corridor or dead end reverses its
/// candidate order and pulls that agent into the vertex it leaves (the swap
/// emulation of LaCAM*'s PIBT). Without it, two agents in a dead end can
/// block each other forever.
std::vector<VertexId> pibt_step(std::span<const AgentState> agents, const GuidanceGraph& g,
                                DistanceCache& distances, bool swap = true,
                                TieBreak ties = TieBreak::VertexId, std::uint64_t tie_seed = 0);

struct SimResult {
  double throughput = 0.0;
  std::int64_t goals_reached = 0;
  std::vector<std::int64_t> edge_usage;  // per edge id, waits included
  std::vector<std::int64_t> tile_usage;  // per vertex id, occupancy after each step
  bool success = false;
  int steps_executed = 0;
  int timesteps = 0;
  int num_agents = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

nlohmann::json sim_result_to_json(const SimResult& r);

/// Called after every executed step with positions before and after.
using StepObserver =
    std::function<void(int step, std::span<const VertexId> before, std::span<const VertexId> after)>;

/// Lifelong PIBT simulation. `shared`, when given, must already contain the
/// distance maps of every goal in TaskSets::goals (see DistanceCache::warm);
/// otherwise a private cache is filled lazily.
SimResult run_simulation(const GuidanceGraph& g, const SimConfig& cfg,
                         const DistanceCache* shared = nullptr,
                         const StepObserver& observer = {});

}  // namespace ggo
