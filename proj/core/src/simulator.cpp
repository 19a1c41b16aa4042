#include "ggo/simulator.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "ggo/error.hpp"

namespace ggo {

namespace {

using DistanceLookup = std::function<const DistanceMap&(VertexId)>;

// Draws uniformly from `pool` (sorted ascending) excluding `self`.
// Returns kNoVertex when nothing remains.
VertexId draw_excluding(const std::vector<VertexId>& pool, VertexId self, Rng& rng) {
  const auto it = std::lower_bound(pool.begin(), pool.end(), self);
  const bool contains = it != pool.end() && *it == self;
  const std::size_t available = pool.size() - (contains ? 1 : 0);
  if (available == 0) return kNoVertex;
  auto k = static_cast<std::size_t>(rng.below(available));
  if (contains && k >= static_cast<std::size_t>(it - pool.begin())) ++k;
  return pool[k];
}

// Priority inheritance with backtracking over one timestep. Buffers are
// kept across steps to avoid reallocation.
//
// With `swap` enabled the swap emulation of LaCAM*'s PIBT is added: when the
// agent's best neighbour is held by an agent that it can only exchange
// places with through a corridor or dead end, the candidate order is
// reversed and that agent is pulled into the vacated vertex.
class Pibt {
 public:
  Pibt(const GuidanceGraph& g, std::size_t num_agents, bool swap, TieBreak ties,
       std::uint64_t seed)
      : g_(g),
        idx_(g.indexer()),
        swap_(swap),
        ties_(ties),
        seed_(seed),
        occupied_now_(idx_.num_vertices(), -1),
        occupied_next_(idx_.num_vertices(), -1),
        next_(num_agents, kNoVertex),
        order_(num_agents),
        jitter_scale_(std::accumulate(g.weights().begin(), g.weights().end(), 0.0) /
                      static_cast<double>(g.weights().size())) {}

  std::vector<VertexId> step(std::span<const AgentState> agents, const DistanceLookup& lookup) {
    agents_ = agents;
    lookup_ = &lookup;
    ++step_count_;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      occupied_now_[static_cast<std::size_t>(agents[i].position)] = static_cast<int>(i);
      next_[i] = kNoVertex;
    }
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      const double pa = agents[static_cast<std::size_t>(a)].priority;
      const double pb = agents[static_cast<std::size_t>(b)].priority;
      if (pa != pb) return pa > pb;
      return a < b;
    });
    for (int i : order_) {
      if (next_[static_cast<std::size_t>(i)] == kNoVertex) solve(i);
    }
    std::vector<VertexId> result(next_.begin(), next_.begin() + static_cast<std::ptrdiff_t>(agents.size()));
    for (std::size_t i = 0; i < agents.size(); ++i) {
      occupied_now_[static_cast<std::size_t>(agents[i].position)] = -1;
      occupied_next_[static_cast<std::size_t>(next_[i])] = -1;
    }
    return result;
  }

 private:
  struct Candidate {
    double score;
    VertexId vertex;
    std::uint64_t tie = 0;
  };

  VertexId position(int a) const { return agents_[static_cast<std::size_t>(a)].position; }
  int occupant(VertexId v) const { return occupied_now_[static_cast<std::size_t>(v)]; }
  double dist(int a, VertexId v) const {
    return (*lookup_)(agents_[static_cast<std::size_t>(a)].goal)[v];
  }

  // Neighbour that a pull along v could continue to, skipping `from` and
  // dead ends held by an agent sitting on its own goal. Returns the number
  // of such neighbours.
  int open_neighbours(VertexId v, VertexId from, VertexId& last) const {
    int n = 0;
    for (Action a : kMoves) {
      const EdgeId e = idx_.edge(v, a);
      if (e == kNoEdge) continue;
      const VertexId u = idx_.target(e);
      if (u == from) continue;
      const int k = occupant(u);
      if (k != -1 && degree(u) == 1 && agents_[static_cast<std::size_t>(k)].goal == u) continue;
      ++n;
      last = u;
    }
    return n;
  }

  int degree(VertexId v) const {
    int n = 0;
    for (Action a : kMoves) n += idx_.edge(v, a) != kNoEdge ? 1 : 0;
    return n;
  }

  bool swap_required(int pusher, int puller, VertexId v_pusher, VertexId v_puller) const {
    while (dist(pusher, v_puller) < dist(pusher, v_pusher)) {
      VertexId next = kNoVertex;
      const int n = open_neighbours(v_puller, v_pusher, next);
      if (n >= 2) return false;
      if (n <= 0) break;
      v_pusher = v_puller;
      v_puller = next;
    }
    return dist(puller, v_pusher) < dist(puller, v_puller) &&
           (dist(pusher, v_pusher) == 0.0 || dist(pusher, v_puller) < dist(pusher, v_pusher));
  }

  bool swap_possible(VertexId v_pusher_origin, VertexId v_puller_origin) const {
    VertexId v_pusher = v_pusher_origin;
    VertexId v_puller = v_puller_origin;
    for (std::size_t guard = 0; v_puller != v_pusher_origin && guard <= idx_.num_vertices(); ++guard) {
      VertexId next = kNoVertex;
      const int n = open_neighbours(v_puller, v_pusher, next);
      if (n >= 2) return true;
      if (n <= 0) return false;
      v_pusher = v_puller;
      v_puller = next;
    }
    return false;
  }

  int swap_partner(int ai, VertexId best) const {
    const VertexId here = position(ai);
    const int j = occupant(best);
    if (j != -1 && j != ai && next_[static_cast<std::size_t>(j)] == kNoVertex &&
        swap_required(ai, j, here, best) && swap_possible(best, here)) {
      return j;
    }
    if (best != here) {
      for (Action a : kMoves) {
        const EdgeId e = idx_.edge(here, a);
        if (e == kNoEdge) continue;
        const int k = occupant(idx_.target(e));
        if (k != -1 && best != position(k) && swap_required(k, ai, here, best) &&
            swap_possible(best, here)) {
          return k;
        }
      }
    }
    return -1;
  }

  std::uint64_t tie_key(int ai, VertexId v) const {
    if (ties_ == TieBreak::VertexId) return 0;
    std::uint64_t h = mix64(seed_ ^ step_count_);
    h = mix64(h ^ static_cast<std::uint64_t>(ai));
    return mix64(h ^ static_cast<std::uint64_t>(v));
  }

  // Seeded jitter in [0, mean edge weight), so it scales with the weights.
  double jitter(std::uint64_t key) const {
    if (ties_ == TieBreak::VertexId) return 0.0;
    return static_cast<double>(key >> 11) * 0x1.0p-53 * jitter_scale_;
  }

  bool solve(int ai) {
    const AgentState& agent = agents_[static_cast<std::size_t>(ai)];
    const VertexId here = agent.position;
    const DistanceMap& dist_here = (*lookup_)(agent.goal);

    std::array<Candidate, kNumActions> cands{};
    std::size_t n = 0;
    for (int a = 0; a < kNumActions; ++a) {
      const EdgeId e = idx_.edge(here, static_cast<Action>(a));
      if (e == kNoEdge) continue;
      const VertexId v = idx_.target(e);
      const std::uint64_t key = tie_key(ai, v);
      cands[n++] = {g_.weight(e) + dist_here[v] + jitter(key), v, key};
    }
    const auto end = cands.begin() + static_cast<std::ptrdiff_t>(n);
    std::sort(cands.begin(), end, [](const Candidate& x, const Candidate& y) {
      if (x.score != y.score) return x.score < y.score;
      if (x.tie != y.tie) return x.tie < y.tie;
      return x.vertex < y.vertex;
    });

    int swap_agent = -1;
    if (swap_) {
      swap_agent = swap_partner(ai, cands[0].vertex);
      if (swap_agent != -1) std::reverse(cands.begin(), end);
    }

    for (std::size_t k = 0; k < n; ++k) {
      const VertexId v = cands[k].vertex;
      if (occupied_next_[static_cast<std::size_t>(v)] != -1) continue;
      const int ak = occupant(v);
      // Would swap with an agent already moving onto our vertex (this
      // includes the agent that pushed us).
      if (ak != -1 && ak != ai && next_[static_cast<std::size_t>(ak)] == here) continue;
      occupied_next_[static_cast<std::size_t>(v)] = ai;
      next_[static_cast<std::size_t>(ai)] = v;
      if (ak != -1 && ak != ai && next_[static_cast<std::size_t>(ak)] == kNoVertex) {
        if (!solve(ak)) continue;
      }
      if (k == 0 && swap_agent != -1 && next_[static_cast<std::size_t>(swap_agent)] == kNoVertex &&
          occupied_next_[static_cast<std::size_t>(here)] == -1) {
        occupied_next_[static_cast<std::size_t>(here)] = swap_agent;
        next_[static_cast<std::size_t>(swap_agent)] = here;
      }
      return true;
    }
    occupied_next_[static_cast<std::size_t>(here)] = ai;
    next_[static_cast<std::size_t>(ai)] = here;
    return false;
  }

  const GuidanceGraph& g_;
  const EdgeIndexer& idx_;
  bool swap_;
  TieBreak ties_;
  std::uint64_t seed_;
  std::vector<int> occupied_now_;
  std::vector<int> occupied_next_;
  std::vector<VertexId> next_;
  std::vector<int> order_;
  std::span<const AgentState> agents_;
  const DistanceLookup* lookup_ = nullptr;
  std::uint64_t step_count_ = 0;
  double jitter_scale_;
};

}  // namespace

TaskSets TaskSets::build(const GridMap& map, TaskMode mode) {
  TaskSets t;
  t.mode = mode;
  std::vector<VertexId> all(map.num_vertices());
  std::iota(all.begin(), all.end(), 0);
  switch (mode) {
    case TaskMode::UniformRandom:
      t.starts = all;
      t.goals = all;
      break;
    case TaskMode::WarehouseAlternating:
      t.endpoints = map.vertices_of(TileKind::Endpoint);
      t.workstations = map.vertices_of(TileKind::Workstation);
      if (t.endpoints.empty() || t.workstations.empty()) {
        throw EmptyGoalSetError("alternating mode needs at least one endpoint and one workstation");
      }
      t.starts = all;
      std::merge(t.endpoints.begin(), t.endpoints.end(), t.workstations.begin(),
                 t.workstations.end(), std::back_inserter(t.goals));
      break;
    case TaskMode::WarehouseEndpoints:
      t.endpoints = map.vertices_of(TileKind::Endpoint);
      t.starts = map.vertices_of(TileKind::Home);
      if (t.starts.empty() || t.endpoints.size() < 2) {
        throw EmptyGoalSetError("endpoint mode needs at least one home and two endpoints");
      }
      t.goals = t.endpoints;
      break;
  }
  return t;
}

Rng agent_goal_rng(std::uint64_t seed, int agent_id) {
  return Rng(derive_seed(seed, {1, static_cast<std::uint64_t>(agent_id)}));
}

VertexId assign_goal(AgentState& agent, const TaskSets& tasks, Rng& rng) {
  VertexId goal = kNoVertex;
  if (tasks.mode == TaskMode::WarehouseAlternating) {
    TileKind kind = agent.phase == TileKind::Endpoint ? TileKind::Workstation : TileKind::Endpoint;
    const auto& pool = kind == TileKind::Endpoint ? tasks.endpoints : tasks.workstations;
    goal = draw_excluding(pool, agent.position, rng);
    if (goal == kNoVertex) {
      kind = kind == TileKind::Endpoint ? TileKind::Workstation : TileKind::Endpoint;
      const auto& other = kind == TileKind::Endpoint ? tasks.endpoints : tasks.workstations;
      goal = draw_excluding(other, agent.position, rng);
    }
    agent.phase = kind;
  } else {
    goal = draw_excluding(tasks.goals, agent.position, rng);
  }
  if (goal == kNoVertex) {
    throw EmptyGoalSetError("no goal distinct from vertex " + std::to_string(agent.position));
  }
  agent.goal = goal;
  return goal;
}

std::vector<AgentState> init_agents(const TaskSets& tasks, const SimConfig& cfg,
                                    std::vector<Rng>& goal_rngs) {
  if (cfg.num_agents < 0 || static_cast<std::size_t>(cfg.num_agents) > tasks.starts.size()) {
    throw TooManyAgentsError(std::to_string(cfg.num_agents) + " agents requested but only " +
                             std::to_string(tasks.starts.size()) + " start tiles exist");
  }
  Rng rng(derive_seed(cfg.seed, {0}));
  std::vector<VertexId> pool = tasks.starts;
  std::vector<AgentState> agents(static_cast<std::size_t>(cfg.num_agents));
  goal_rngs.clear();
  for (int i = 0; i < cfg.num_agents; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const std::size_t j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[j]);
    AgentState& a = agents[k];
    a.id = i;
    a.position = pool[k];
    a.epsilon = rng.uniform();
    a.priority = a.epsilon;
    a.phase = TileKind::Workstation;
    goal_rngs.push_back(agent_goal_rng(cfg.seed, i));
  }
  for (auto& a : agents) assign_goal(a, tasks, goal_rngs[static_cast<std::size_t>(a.id)]);
  return agents;
}

std::string_view to_string(TieBreak t) {
  return t == TieBreak::VertexId ? "vertex-id" : "seeded";
}

TieBreak parse_tie_break(std::string_view text) {
  for (auto t : {TieBreak::VertexId, TieBreak::Seeded}) {
    if (text == to_string(t)) return t;
  }
  throw ConfigError("unknown tie-break '" + std::string(text) + "'");
}

std::vector<VertexId> pibt_step(std::span<const AgentState> agents, const GuidanceGraph& g,
                                DistanceCache& distances, bool swap, TieBreak ties,
                                std::uint64_t tie_seed) {
  Pibt pibt(g, agents.size(), swap, ties, tie_seed);
  const DistanceLookup lookup = [&](VertexId goal) -> const DistanceMap& {
    return distances.get(goal);
  };
  return pibt.step(agents, lookup);
}

nlohmann::json sim_result_to_json(const SimResult& r) {
  return {{"throughput", r.throughput},       {"goals_reached", r.goals_reached},
          {"success", r.success},             {"steps_executed", r.steps_executed},
          {"timesteps", r.timesteps},         {"num_agents", r.num_agents},
          {"seed", r.seed},                   {"edge_usage", r.edge_usage},
          {"tile_usage", r.tile_usage}};
}

SimResult run_simulation(const GuidanceGraph& g, const SimConfig& cfg, const DistanceCache* shared,
                         const StepObserver& observer) {
  if (cfg.timesteps < 1) throw ConfigError("timesteps must be at least 1");
  const EdgeIndexer& idx = g.indexer();
  const GridMap& map = idx.map();
  const TaskSets tasks = TaskSets::build(map, cfg.task_mode);

  std::vector<Rng> goal_rngs;
  std::vector<AgentState> agents = init_agents(tasks, cfg, goal_rngs);

  DistanceCache local(g);
  DistanceLookup lookup;
  if (shared != nullptr) {
    lookup = [shared, &local](VertexId goal) -> const DistanceMap& {
      if (const DistanceMap* d = shared->find(goal)) return *d;
      return local.get(goal);
    };
  } else {
    lookup = [&local](VertexId goal) -> const DistanceMap& { return local.get(goal); };
  }

  SimResult result;
  result.edge_usage.assign(idx.num_edges(), 0);
  result.tile_usage.assign(idx.num_vertices(), 0);
  result.timesteps = cfg.timesteps;
  result.num_agents = cfg.num_agents;
  result.seed = cfg.seed;
  result.success = true;

  Pibt pibt(g, agents.size(), cfg.swap, cfg.tie_break, derive_seed(cfg.seed, {5}));
  std::vector<VertexId> before(agents.size());
  for (int t = 0; t < cfg.timesteps; ++t) {
    const std::vector<VertexId> next = pibt.step(agents, lookup);
    int waited = 0;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      AgentState& a = agents[i];
      before[i] = a.position;
      const EdgeId e = next[i] == a.position ? idx.wait_edge(a.position)
                                             : idx.edge_between(a.position, next[i]);
      if (next[i] == a.position) ++waited;
      ++result.edge_usage[static_cast<std::size_t>(e)];
      a.position = next[i];
      ++result.tile_usage[static_cast<std::size_t>(a.position)];
      if (a.position == a.goal) {
        ++a.goals_reached;
        ++result.goals_reached;
        a.priority = a.epsilon;
        assign_goal(a, tasks, goal_rngs[i]);
      } else {
        a.priority += 1.0;
      }
    }
    ++result.steps_executed;
    if (observer) observer(t, before, next);
    if (cfg.congestion_stop && 2 * waited > cfg.num_agents) {
      result.success = false;
      break;
    }
  }
  result.throughput = static_cast<double>(result.goals_reached) / cfg.timesteps;
  return result;
}

}  // namespace ggo
