#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ggo/baselines.hpp"
#include "ggo/cmaes.hpp"
#include "ggo/error.hpp"
#include "ggo/eval.hpp"
#include "ggo/experiment.hpp"
#include "ggo/map.hpp"
#include "ggo/piu.hpp"
#include "ggo/simulator.hpp"

namespace {

using nlohmann::json;

int exit_code(const std::string& category) {
  static const std::map<std::string, int> codes = {{"parse", 3},          {"config", 4},
                                                   {"no-path", 5},        {"empty-goal-set", 6},
                                                   {"too-many-agents", 7}, {"io", 8}};
  const auto it = codes.find(category);
  return it == codes.end() ? 1 : it->second;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(1) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ggo::IoError("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

struct MapArgs {
  std::string map;
  std::string task_mode;

  void add(CLI::App* app) {
    app->add_option("--map", map, "Map file (MovingAI or warehouse format)")->required();
    app->add_option("--task-mode", task_mode,
                    "uniform | warehouse-alternating | warehouse-endpoints (default: from map)");
  }
  std::shared_ptr<const ggo::EdgeIndexer> indexer() const {
    if (!std::filesystem::exists(map)) throw ggo::IoError("map file not found: '" + map + "'");
    return ggo::build_edge_indexer(ggo::load_map(map));
  }
  ggo::TaskMode mode(const ggo::GridMap& m) const {
    return task_mode.empty() ? ggo::default_task_mode(m) : ggo::parse_task_mode(task_mode);
  }
};

struct SimArgs {
  int agents = 100;
  int steps = 1000;
  std::uint64_t seed = 0;
  bool congestion_stop = false;
  bool no_swap = false;
  std::string tie_break = "seeded";

  void add(CLI::App* app) {
    app->add_option("--agents", agents, "Number of agents")->check(CLI::PositiveNumber);
    app->add_option("--steps", steps, "Timesteps per simulation")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Base seed");
    app->add_flag("--congestion-stop", congestion_stop,
                  "Stop (and mark failed) when more than half the agents wait");
    app->add_flag("--no-swap", no_swap, "Disable the PIBT swap emulation");
    app->add_option("--tie-break", tie_break, "PIBT tie-break: seeded or vertex-id")
        ->check(CLI::IsMember({"seeded", "vertex-id"}));
  }
  ggo::SimConfig config(ggo::TaskMode mode) const {
    ggo::SimConfig c;
    c.num_agents = agents;
    c.timesteps = steps;
    c.seed = seed;
    c.task_mode = mode;
    c.congestion_stop = congestion_stop;
    c.swap = !no_swap;
    c.tie_break = ggo::parse_tie_break(tie_break);
    return c;
  }
};

struct BoundsArgs {
  ggo::WeightBounds bounds;
  void add(CLI::App* app) {
    app->add_option("--lb", bounds.lb, "Lower weight bound");
    app->add_option("--ub", bounds.ub, "Upper weight bound");
  }
};

ggo::GuidanceGraph load_or_unweighted(const std::string& path,
                                      std::shared_ptr<const ggo::EdgeIndexer> idx) {
  if (path.empty()) return ggo::unweighted(std::move(idx));
  return ggo::load_guidance(path, std::move(idx));
}

ggo::GenerationCallback log_to(std::ofstream& log, bool verbose) {
  return [&log, verbose](const ggo::GenerationRecord& r) {
    const json j = ggo::to_json(r);
    if (log.is_open()) log << j.dump() << '\n' << std::flush;
    if (verbose) std::cerr << j.dump() << '\n';
  };
}

void open_log(std::ofstream& log, const std::string& path) {
  if (path.empty()) return;
  log.open(path, std::ios::binary);
  if (!log) throw ggo::IoError("cannot write log '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guidance-graph optimization for lifelong multi-agent path finding"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Run one simulation and print its result");
  MapArgs sim_map;
  SimArgs sim_args;
  std::string sim_guidance, sim_out;
  bool sim_usage = false;
  sim_map.add(sim_cmd);
  sim_args.add(sim_cmd);
  sim_cmd->add_option("--guidance", sim_guidance, "Guidance graph file (default: unweighted)");
  sim_cmd->add_option("--out", sim_out, "Result file (default: stdout)");
  sim_cmd->add_flag("--usage", sim_usage, "Include per-edge and per-tile usage");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Run seeds seed..seed+runs-1 and summarize");
  MapArgs eval_map;
  SimArgs eval_args;
  std::string eval_guidance, eval_out, eval_timings, eval_heatmaps;
  int eval_runs = 50;
  eval_map.add(eval_cmd);
  eval_args.add(eval_cmd);
  eval_cmd->add_option("--guidance", eval_guidance, "Guidance graph file (default: unweighted)");
  eval_cmd->add_option("--runs", eval_runs, "Number of simulations")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", eval_out, "Report file (default: stdout)");
  eval_cmd->add_option("--timings", eval_timings, "Wall-time file");
  eval_cmd->add_option("--heatmap-dir", eval_heatmaps, "Also export heatmaps here");

  // generate-baseline
  auto* base_cmd = app.add_subcommand("generate-baseline", "Write a baseline guidance graph");
  MapArgs base_map;
  BoundsArgs base_bounds;
  std::string base_method = "unweighted", base_out;
  ggo::BaselineParams base_params;
  base_map.add(base_cmd);
  base_bounds.add(base_cmd);
  base_cmd->add_option("--method", base_method, "unweighted | crisscross | traffic-flow | hm-cost");
  base_cmd->add_option("--seed", base_params.seed, "Sampling seed");
  base_cmd->add_option("--n-base", base_params.n_base, "Sampled paths")->check(CLI::NonNegativeNumber);
  base_cmd->add_option("--alpha", base_params.alpha, "HM follow preference");
  base_cmd->add_option("--beta", base_params.beta, "HM interference");
  base_cmd->add_option("--gamma", base_params.gamma, "HM saturation");
  base_cmd->add_option("--out", base_out, "Guidance graph file")->required();

  // optimize-cmaes
  auto* cma_cmd = app.add_subcommand("optimize-cmaes", "Direct edge-weight optimization");
  MapArgs cma_map;
  SimArgs cma_sim;
  BoundsArgs cma_bounds;
  ggo::CmaesConfig cma;
  std::string cma_method = "normalization", cma_out, cma_log;
  bool cma_verbose = false;
  cma_map.add(cma_cmd);
  cma_sim.add(cma_cmd);
  cma_bounds.add(cma_cmd);
  cma_cmd->add_option("--batch", cma.batch, "Candidates per generation")->check(CLI::Range(2, 100000));
  cma_cmd->add_option("--iters", cma.iterations, "Generations")->check(CLI::NonNegativeNumber);
  cma_cmd->add_option("--elites", cma.elites, "Elites per update")->check(CLI::PositiveNumber);
  cma_cmd->add_option("--evals", cma.evals, "Simulations per candidate")->check(CLI::PositiveNumber);
  cma_cmd->add_option("--bounds-method", cma_method,
                      "normalization | projection | reflection | transformation");
  cma_cmd->add_option("--sigma0", cma.sigma0, "Initial step size (default 0.2*(ub-lb))");
  cma_cmd->add_option("--out", cma_out, "Best guidance graph file")->required();
  cma_cmd->add_option("--log", cma_log, "Per-generation log (JSON lines)");
  cma_cmd->add_flag("-v,--verbose", cma_verbose, "Print generation records to stderr");

  // optimize-piu
  auto* piu_cmd = app.add_subcommand("optimize-piu", "Train the update model");
  MapArgs piu_map;
  SimArgs piu_sim;
  BoundsArgs piu_bounds;
  ggo::CmaesConfig piu_cma;
  piu_cma.sigma0 = 0.5;
  ggo::PiuConfig piu;
  std::string piu_model, piu_guidance, piu_log;
  bool piu_verbose = false;
  piu_map.add(piu_cmd);
  piu_sim.add(piu_cmd);
  piu_bounds.add(piu_cmd);
  piu_cmd->add_option("--np", piu.iterations, "Update iterations per PIU run")->check(CLI::PositiveNumber);
  piu_cmd->add_option("--ne", piu.sims, "Simulations per PIU iteration")->check(CLI::PositiveNumber);
  piu_cmd->add_option("--batch", piu_cma.batch, "Candidates per generation")->check(CLI::Range(2, 100000));
  piu_cmd->add_option("--iters", piu_cma.iterations, "Generations")->check(CLI::NonNegativeNumber);
  piu_cmd->add_option("--elites", piu_cma.elites, "Elites per update")->check(CLI::PositiveNumber);
  piu_cmd->add_option("--sigma0", piu_cma.sigma0, "Initial step size on theta");
  piu_cmd->add_option("--out-model", piu_model, "Model file")->required();
  piu_cmd->add_option("--out-guidance", piu_guidance, "Best guidance graph seen in training");
  piu_cmd->add_option("--log", piu_log, "Per-generation log (JSON lines)");
  piu_cmd->add_flag("-v,--verbose", piu_verbose, "Print generation records to stderr");

  // apply-model
  auto* apply_cmd = app.add_subcommand("apply-model", "Generate a guidance graph from a model");
  MapArgs apply_map;
  SimArgs apply_sim;
  BoundsArgs apply_bounds;
  std::string apply_model_path, apply_out;
  int apply_np = 5;
  apply_map.add(apply_cmd);
  apply_sim.add(apply_cmd);
  apply_bounds.add(apply_cmd);
  apply_cmd->add_option("--model", apply_model_path, "Model file")->required();
  apply_cmd->add_option("--np", apply_np, "Update iterations")->check(CLI::PositiveNumber);
  apply_cmd->add_option("--out-guidance", apply_out, "Guidance graph file")->required();

  // export-heatmap
  auto* heat_cmd = app.add_subcommand("export-heatmap", "Evaluate and write usage heatmaps");
  MapArgs heat_map;
  SimArgs heat_sim;
  std::string heat_guidance, heat_dir;
  int heat_runs = 1;
  heat_map.add(heat_cmd);
  heat_sim.add(heat_cmd);
  heat_cmd->add_option("--guidance", heat_guidance, "Guidance graph file (default: unweighted)");
  heat_cmd->add_option("--runs", heat_runs, "Number of simulations")->check(CLI::PositiveNumber);
  heat_cmd->add_option("--out-dir", heat_dir, "Output directory")->required();

  // gen-warehouse
  auto* wh_cmd = app.add_subcommand("gen-warehouse", "Write a scaled warehouse map");
  int wh_rows = 2, wh_cols = 3;
  std::string wh_out;
  wh_cmd->add_option("--block-rows", wh_rows, "Shelf block rows")->check(CLI::PositiveNumber);
  wh_cmd->add_option("--block-cols", wh_cols, "Shelf block columns")->check(CLI::PositiveNumber);
  wh_cmd->add_option("--out", wh_out, "Map file")->required();

  // gen-random
  auto* rnd_cmd = app.add_subcommand("gen-random", "Write a connected random obstacle map");
  int rnd_h = 32, rnd_w = 32;
  std::size_t rnd_obstacles = 205;
  std::uint64_t rnd_seed = 0;
  std::string rnd_out;
  rnd_cmd->add_option("--height", rnd_h)->check(CLI::PositiveNumber);
  rnd_cmd->add_option("--width", rnd_w)->check(CLI::PositiveNumber);
  rnd_cmd->add_option("--obstacles", rnd_obstacles);
  rnd_cmd->add_option("--seed", rnd_seed);
  rnd_cmd->add_option("--out", rnd_out, "Map file")->required();

  // run-experiment
  auto* exp_cmd = app.add_subcommand("run-experiment", "Run a declarative experiment config");
  std::string exp_config, exp_out;
  exp_cmd->add_option("--config", exp_config, "Experiment config (JSON)")->required();
  exp_cmd->add_option("--out-dir", exp_out, "Artifact directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) {
      const auto idx = sim_map.indexer();
      const auto g = load_or_unweighted(sim_guidance, idx);
      const auto r = ggo::run_simulation(g, sim_args.config(sim_map.mode(idx->map())));
      json j = ggo::sim_result_to_json(r);
      if (!sim_usage) {
        j.erase("edge_usage");
        j.erase("tile_usage");
      }
      write_json(sim_out, j);
    } else if (*eval_cmd) {
      const auto idx = eval_map.indexer();
      const auto g = load_or_unweighted(eval_guidance, idx);
      const auto rep = ggo::evaluate(g, eval_args.config(eval_map.mode(idx->map())), eval_runs, threads);
      write_json(eval_out, ggo::report_to_json(rep));
      if (!eval_timings.empty()) write_json(eval_timings, ggo::timings_to_json(rep));
      if (!eval_heatmaps.empty()) ggo::export_heatmaps(rep, *idx, eval_heatmaps);
      std::cerr << "mean throughput " << rep.mean_throughput << " +- " << rep.std_error
                << " (success " << rep.success_rate << ")\n";
    } else if (*base_cmd) {
      const auto idx = base_map.indexer();
      const auto g = ggo::make_baseline(ggo::parse_baseline_method(base_method), idx,
                                        base_map.mode(idx->map()), base_params);
      ggo::save_guidance(base_out, g, base_bounds.bounds);
    } else if (*cma_cmd) {
      const auto idx = cma_map.indexer();
      cma.method = ggo::parse_bounds_method(cma_method);
      cma.bounds = cma_bounds.bounds;
      cma.seed = cma_sim.seed;
      cma.threads = threads;
      std::ofstream log;
      open_log(log, cma_log);
      const auto r = ggo::optimize_guidance(idx, cma_sim.config(cma_map.mode(idx->map())), cma,
                                            log_to(log, cma_verbose));
      ggo::save_guidance(cma_out, r.best, cma.bounds);
      std::cerr << "best throughput " << r.best_throughput << '\n';
    } else if (*piu_cmd) {
      const auto idx = piu_map.indexer();
      piu.sim = piu_sim.config(piu_map.mode(idx->map()));
      piu.bounds = piu_bounds.bounds;
      piu_cma.seed = piu_sim.seed;
      piu_cma.threads = threads;
      std::ofstream log;
      open_log(log, piu_log);
      const auto r = ggo::optimize_update_model(idx, piu, piu_cma, log_to(log, piu_verbose));
      ggo::save_model(piu_model, r.model);
      if (!piu_guidance.empty()) ggo::save_guidance(piu_guidance, r.best_graph, piu.bounds);
      std::cerr << "best throughput " << r.best_throughput << '\n';
    } else if (*apply_cmd) {
      const auto idx = apply_map.indexer();
      const ggo::UpdateModel model = ggo::load_model(apply_model_path);
      ggo::PiuConfig p;
      p.arch = model.arch;
      p.iterations = apply_np;
      p.sim = apply_sim.config(apply_map.mode(idx->map()));
      p.bounds = apply_bounds.bounds;
      const auto g = ggo::generate_guidance(model.theta, idx, p);
      ggo::save_guidance(apply_out, g, p.bounds);
    } else if (*heat_cmd) {
      const auto idx = heat_map.indexer();
      const auto g = load_or_unweighted(heat_guidance, idx);
      const auto rep = ggo::evaluate(g, heat_sim.config(heat_map.mode(idx->map())), heat_runs, threads);
      ggo::export_heatmaps(rep, *idx, heat_dir);
    } else if (*wh_cmd) {
      ggo::save_map(wh_out, ggo::generate_scaled_warehouse(wh_rows, wh_cols));
    } else if (*rnd_cmd) {
      std::ofstream out(rnd_out, std::ios::binary);
      if (!out) throw ggo::IoError("cannot write '" + rnd_out + "'");
      out << ggo::serialize_movingai(ggo::generate_random_map(rnd_h, rnd_w, rnd_obstacles, rnd_seed));
    } else if (*exp_cmd) {
      ggo::ExperimentConfig cfg = ggo::load_experiment_config(exp_config);
      if (app.count("--threads") > 0) {
        cfg.threads = threads;
        cfg.cmaes.threads = threads;
      }
      const auto out = ggo::run_experiment(cfg, exp_out);
      std::cerr << "mean throughput " << out.report.mean_throughput << " +- "
                << out.report.std_error << '\n';
      for (const auto& [name, rep] : out.comparisons) {
        std::cerr << "  " << name << ": " << rep.mean_throughput << " +- " << rep.std_error << '\n';
      }
    }
  } catch (const ggo::Error& e) {
    std::cerr << "error [" << e.category() << "]: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
