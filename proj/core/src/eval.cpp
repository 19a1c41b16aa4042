#include "ggo/eval.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ggo/error.hpp"
#include "ggo/parallel.hpp"
#include "ggo/planner.hpp"

namespace ggo {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

constexpr std::string_view kActionNames[] = {"right", "left", "up", "down", "wait"};

}  // namespace

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(sq / static_cast<double>(values.size() - 1));
  s.std_error = sd / std::sqrt(static_cast<double>(values.size()));
  return s;
}

EvalReport evaluate(const GuidanceGraph& g, const SimConfig& sim, int runs, int threads) {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  const TaskSets tasks = TaskSets::build(g.map(), sim.task_mode);
  DistanceCache cache(g);
  cache.warm(tasks.goals, threads);

  EvalReport r;
  r.runs.resize(static_cast<std::size_t>(runs));
  r.wall_seconds.resize(static_cast<std::size_t>(runs));
  parallel_for(r.runs.size(), threads, [&](std::size_t i) {
    SimConfig c = sim;
    c.seed = sim.seed + i;
    const auto t0 = std::chrono::steady_clock::now();
    r.runs[i] = run_simulation(g, c, &cache);
    r.wall_seconds[i] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  std::vector<double> tp;
  double wall = 0.0;
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    if (!r.runs[i].success) continue;
    tp.push_back(r.runs[i].throughput);
    wall += r.wall_seconds[i];
  }
  r.successful = static_cast<int>(tp.size());
  r.success_rate = static_cast<double>(r.successful) / runs;
  const Summary s = summarize(tp);
  r.mean_throughput = s.mean;
  r.std_error = s.std_error;
  r.mean_wall_seconds = r.successful > 0 ? wall / r.successful : 0.0;
  r.config = {{"map", g.map().name()},
              {"agents", sim.num_agents},
              {"timesteps", sim.timesteps},
              {"seed", sim.seed},
              {"runs", runs},
              {"task_mode", to_string(sim.task_mode)},
              {"congestion_stop", sim.congestion_stop},
              {"swap", sim.swap},
              {"tie_break", to_string(sim.tie_break)}};
  return r;
}

nlohmann::json report_to_json(const EvalReport& r, bool include_usage) {
  nlohmann::json runs = nlohmann::json::array();
  for (const SimResult& s : r.runs) {
    nlohmann::json j = {{"seed", s.seed},
                        {"throughput", s.throughput},
                        {"goals_reached", s.goals_reached},
                        {"success", s.success},
                        {"steps_executed", s.steps_executed}};
    if (include_usage) {
      j["edge_usage"] = s.edge_usage;
      j["tile_usage"] = s.tile_usage;
    }
    runs.push_back(std::move(j));
  }
  return {{"config", r.config},
          {"mean_throughput", r.mean_throughput},
          {"std_error", r.std_error},
          {"success_rate", r.success_rate},
          {"successful_runs", r.successful},
          {"runs", std::move(runs)}};
}

nlohmann::json timings_to_json(const EvalReport& r) {
  return {{"mean_wall_seconds", r.mean_wall_seconds}, {"wall_seconds", r.wall_seconds}};
}

std::vector<std::vector<double>> tile_usage_grid(const EvalReport& r, const GridMap& map) {
  std::vector<std::vector<double>> grid(static_cast<std::size_t>(map.height()),
                                        std::vector<double>(static_cast<std::size_t>(map.width()), 0.0));
  if (r.runs.empty()) return grid;
  for (const SimResult& s : r.runs) {
    if (s.steps_executed == 0) continue;
    for (std::size_t v = 0; v < s.tile_usage.size(); ++v) {
      const Cell c = map.cell(static_cast<VertexId>(v));
      grid[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] +=
          static_cast<double>(s.tile_usage[v]) / s.steps_executed;
    }
  }
  for (auto& row : grid) {
    for (double& x : row) x /= static_cast<double>(r.runs.size());
  }
  return grid;
}

void export_heatmaps(const EvalReport& r, const EdgeIndexer& indexer,
                     const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  const GridMap& map = indexer.map();
  const auto grid = tile_usage_grid(r, map);

  {
    auto out = open_out(out_dir / "tile_usage.csv");
    for (const auto& row : grid) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
      out << '\n';
    }
  }

  std::vector<double> edge_mean(indexer.num_edges(), 0.0);
  for (const SimResult& s : r.runs) {
    for (std::size_t e = 0; e < edge_mean.size(); ++e) {
      edge_mean[e] += static_cast<double>(s.edge_usage[e]);
    }
  }
  for (double& x : edge_mean) x /= static_cast<double>(std::max<std::size_t>(1, r.runs.size()));

  {
    auto out = open_out(out_dir / "edge_usage.csv");
    out << "edge,row,col,action,target_row,target_col,mean_usage\n";
    for (std::size_t e = 0; e < edge_mean.size(); ++e) {
      const auto id = static_cast<EdgeId>(e);
      const Cell s = map.cell(indexer.source(id));
      const Cell t = map.cell(indexer.target(id));
      out << e << ',' << s.row << ',' << s.col << ','
          << kActionNames[static_cast<int>(indexer.action(id))] << ',' << t.row << ',' << t.col
          << ',' << edge_mean[e] << '\n';
    }
  }

  nlohmann::json j = {{"map", map.name()},
                      {"height", map.height()},
                      {"width", map.width()},
                      {"runs", r.runs.size()},
                      {"tile_usage", grid},
                      {"edge_usage", edge_mean},
                      {"edge_usage_tensor", nlohmann::json::array()}};
  const Tensor3 t = vector_to_tensor(indexer, edge_mean);
  for (int row = 0; row < t.height; ++row) {
    nlohmann::json jr = nlohmann::json::array();
    for (int col = 0; col < t.width; ++col) {
      nlohmann::json jc = nlohmann::json::array();
      for (int ch = 0; ch < t.channels; ++ch) jc.push_back(t.at(row, col, ch));
      jr.push_back(std::move(jc));
    }
    j["edge_usage_tensor"].push_back(std::move(jr));
  }
  auto out = open_out(out_dir / "heatmaps.json");
  out << j.dump(1) << '\n';
}

}  // namespace ggo
