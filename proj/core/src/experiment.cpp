#include "ggo/experiment.hpp"

#include <chrono>
#include <fstream>
#include <limits>
#include <set>

#include "ggo/error.hpp"

namespace ggo {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Typed access to one JSON object; remembers which keys were read so
// unknown keys can be reported.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_.empty() ? "(root)" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  int get_int(const std::string& key, int fallback, int min_value) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < min_value ||
        v.get<std::int64_t>() > std::numeric_limits<int>::max()) {
      fail(path(key), "expected an integer >= " + std::to_string(min_value));
    }
    return v.get<int>();
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  double get_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    return v.get<double>();
  }

  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) fail(path(key), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

MapSource parse_map_source(const json& j, const std::string& path,
                           const std::filesystem::path& base_dir) {
  MapSource m;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return (fp.is_absolute() || base_dir.empty() ? fp : base_dir / fp).lexically_normal().string();
  };
  if (j.is_string()) {
    m.path = resolve(j.get<std::string>());
    return m;
  }
  Fields f(j, path);
  if (f.has("path")) {
    m.path = resolve(f.get_string("path", ""));
    f.finish();
    return m;
  }
  m.generator = f.get_string("generate", "");
  if (m.generator == "random") {
    m.height = f.get_int("height", 32, 1);
    m.width = f.get_int("width", 32, 1);
    m.obstacles = f.get_int("obstacles", 0, 0);
    m.seed = f.get_seed("seed", 0);
  } else if (m.generator == "warehouse") {
    m.block_rows = f.get_int("block_rows", 2, 1);
    m.block_cols = f.get_int("block_cols", 3, 1);
  } else {
    Fields::fail(join(path, "generate"), "expected \"random\" or \"warehouse\" (or give \"path\")");
  }
  f.finish();
  return m;
}

json map_source_to_json(const MapSource& m) {
  if (m.generator.empty()) return {{"path", m.path}};
  if (m.generator == "random") {
    return {{"generate", "random"},
            {"height", m.height},
            {"width", m.width},
            {"obstacles", m.obstacles},
            {"seed", m.seed}};
  }
  return {{"generate", "warehouse"}, {"block_rows", m.block_rows}, {"block_cols", m.block_cols}};
}

const std::set<std::string> kMethods = {"unweighted", "crisscross", "traffic-flow",
                                        "hm-cost",    "cmaes",      "piu"};

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(1) << '\n';
}

json summary_entry(const EvalReport& r) {
  return {{"mean_throughput", r.mean_throughput},
          {"std_error", r.std_error},
          {"success_rate", r.success_rate}};
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  Fields root(j, "");
  ExperimentConfig c;
  if (!root.has("schema_version")) Fields::fail("schema_version", "missing");
  if (root.get_int("schema_version", 0, 0) != kExperimentSchemaVersion) {
    Fields::fail("schema_version", "unsupported version (expected " +
                                       std::to_string(kExperimentSchemaVersion) + ")");
  }
  c.name = root.get_string("name", "experiment");
  if (!root.has("map")) Fields::fail("map", "missing");
  c.map = parse_map_source(root.raw("map"), "map", base_dir);
  if (root.has("task_mode")) {
    const std::string mode = root.get_string("task_mode", "");
    try {
      c.task_mode = parse_task_mode(mode);
    } catch (const Error&) {
      Fields::fail("task_mode", "unknown task mode '" + mode + "'");
    }
  }

  if (root.has("simulation")) {
    Fields f(root.raw("simulation"), "simulation");
    c.sim.num_agents = f.get_int("agents", c.sim.num_agents, 1);
    c.sim.timesteps = f.get_int("timesteps", c.sim.timesteps, 1);
    c.sim.seed = f.get_seed("seed", c.sim.seed);
    c.sim.congestion_stop = f.get_bool("congestion_stop", c.sim.congestion_stop);
    c.sim.swap = f.get_bool("swap", c.sim.swap);
    if (f.has("tie_break")) {
      const std::string t = f.get_string("tie_break", "");
      try {
        c.sim.tie_break = parse_tie_break(t);
      } catch (const Error&) {
        Fields::fail("simulation.tie_break", "unknown tie-break '" + t + "'");
      }
    }
    f.finish();
  }
  if (root.has("bounds")) {
    Fields f(root.raw("bounds"), "bounds");
    c.bounds.lb = f.get_double("lb", c.bounds.lb);
    c.bounds.ub = f.get_double("ub", c.bounds.ub);
    f.finish();
  }
  if (!(c.bounds.lb > 0.0) || !(c.bounds.lb < c.bounds.ub)) {
    Fields::fail("bounds", "need 0 < lb < ub");
  }

  c.method = root.get_string("method", "unweighted");
  if (!kMethods.contains(c.method)) Fields::fail("method", "unknown method '" + c.method + "'");

  if (root.has("baseline")) {
    Fields f(root.raw("baseline"), "baseline");
    c.baseline.n_base = f.get_int("n_base", c.baseline.n_base, 0);
    c.baseline.alpha = f.get_double("alpha", c.baseline.alpha);
    c.baseline.beta = f.get_double("beta", c.baseline.beta);
    c.baseline.gamma = f.get_double("gamma", c.baseline.gamma);
    c.baseline.seed = f.get_seed("seed", c.baseline.seed);
    f.finish();
    if (!(c.baseline.gamma > 0.0)) Fields::fail("baseline.gamma", "must be positive");
  }

  if (root.has("cmaes")) {
    Fields f(root.raw("cmaes"), "cmaes");
    c.cmaes.batch = f.get_int("batch", c.cmaes.batch, 2);
    c.cmaes.iterations = f.get_int("iterations", c.cmaes.iterations, 0);
    c.cmaes.elites = f.get_int("elites", c.cmaes.elites, 1);
    c.cmaes.evals = f.get_int("evals", c.cmaes.evals, 1);
    c.cmaes.sigma0 = f.get_double("sigma0", c.cmaes.sigma0);
    c.cmaes.seed = f.get_seed("seed", c.cmaes.seed);
    if (f.has("bounds_method")) {
      const std::string m = f.get_string("bounds_method", "");
      try {
        c.cmaes.method = parse_bounds_method(m);
      } catch (const Error&) {
        Fields::fail("cmaes.bounds_method", "unknown bounds method '" + m + "'");
      }
    }
    f.finish();
  }
  if (c.cmaes.elites > c.cmaes.batch) Fields::fail("cmaes.elites", "must not exceed cmaes.batch");
  c.cmaes.bounds = c.bounds;

  if (root.has("piu")) {
    Fields f(root.raw("piu"), "piu");
    c.piu.iterations = f.get_int("iterations", c.piu.iterations, 1);
    c.piu.sims = f.get_int("sims", c.piu.sims, 1);
    if (f.has("hidden")) {
      const json& h = f.raw("hidden");
      if (!h.is_array() || h.size() != 2 || !h[0].is_number_integer() ||
          !h[1].is_number_integer() || h[0].get<int>() < 1 || h[1].get<int>() < 1) {
        Fields::fail("piu.hidden", "expected two positive integers");
      }
      c.piu.arch.hidden = {h[0].get<int>(), h[1].get<int>()};
    }
    f.finish();
  }
  c.piu.bounds = c.bounds;

  if (root.has("evaluation")) {
    Fields f(root.raw("evaluation"), "evaluation");
    c.eval_runs = f.get_int("runs", c.eval_runs, 1);
    c.eval_seed = f.get_seed("seed", c.eval_seed);
    c.eval_timesteps = f.get_int("timesteps", c.eval_timesteps, 0);
    if (f.has("compare")) {
      const json& list = f.raw("compare");
      if (!list.is_array()) Fields::fail("evaluation.compare", "expected an array of methods");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "evaluation.compare[" + std::to_string(i) + "]";
        if (!list[i].is_string()) Fields::fail(where, "expected a string");
        const std::string m = list[i].get<std::string>();
        try {
          parse_baseline_method(m);
        } catch (const Error&) {
          Fields::fail(where, "unknown baseline method '" + m + "'");
        }
        c.compare.push_back(m);
      }
    }
    f.finish();
  }

  if (root.has("transfer")) {
    const json& list = root.raw("transfer");
    if (!list.is_array()) Fields::fail("transfer", "expected an array");
    if (c.method != "piu" && !list.empty()) Fields::fail("transfer", "only valid with method piu");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "transfer[" + std::to_string(i) + "]";
      Fields f(list[i], where);
      TransferSpec t;
      if (!f.has("map")) Fields::fail(join(where, "map"), "missing");
      t.map = parse_map_source(f.raw("map"), join(where, "map"), base_dir);
      t.agents = f.get_int("agents", c.sim.num_agents, 1);
      f.finish();
      c.transfers.push_back(std::move(t));
    }
  }

  c.threads = root.get_int("threads", 0, 0);
  root.finish();
  c.cmaes.threads = c.threads;
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open experiment config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json compare = c.compare;
  json transfers = json::array();
  for (const TransferSpec& t : c.transfers) {
    transfers.push_back({{"map", map_source_to_json(t.map)}, {"agents", t.agents}});
  }
  json j = {{"schema_version", kExperimentSchemaVersion},
            {"name", c.name},
            {"map", map_source_to_json(c.map)},
            {"simulation",
             {{"agents", c.sim.num_agents},
              {"timesteps", c.sim.timesteps},
              {"seed", c.sim.seed},
              {"congestion_stop", c.sim.congestion_stop},
              {"swap", c.sim.swap},
              {"tie_break", to_string(c.sim.tie_break)}}},
            {"bounds", {{"lb", c.bounds.lb}, {"ub", c.bounds.ub}}},
            {"method", c.method},
            {"baseline",
             {{"n_base", c.baseline.n_base},
              {"alpha", c.baseline.alpha},
              {"beta", c.baseline.beta},
              {"gamma", c.baseline.gamma},
              {"seed", c.baseline.seed}}},
            {"cmaes",
             {{"batch", c.cmaes.batch},
              {"iterations", c.cmaes.iterations},
              {"elites", c.cmaes.elites},
              {"evals", c.cmaes.evals},
              {"bounds_method", to_string(c.cmaes.method)},
              {"sigma0", c.cmaes.sigma0},
              {"seed", c.cmaes.seed}}},
            {"piu",
             {{"iterations", c.piu.iterations},
              {"sims", c.piu.sims},
              {"hidden", c.piu.arch.hidden}}},
            {"evaluation",
             {{"runs", c.eval_runs},
              {"seed", c.eval_seed},
              {"timesteps", c.eval_timesteps},
              {"compare", compare}}},
            {"transfer", transfers},
            {"threads", c.threads}};
  if (c.task_mode) j["task_mode"] = to_string(*c.task_mode);
  return j;
}

GridMap resolve_map(const MapSource& src) {
  if (src.generator == "random") {
    return generate_random_map(src.height, src.width, static_cast<std::size_t>(src.obstacles),
                               src.seed);
  }
  if (src.generator == "warehouse") return generate_scaled_warehouse(src.block_rows, src.block_cols);
  if (!std::filesystem::exists(src.path)) throw IoError("map file not found: '" + src.path + "'");
  return load_map(src.path);
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  using Clock = std::chrono::steady_clock;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  const auto indexer = build_edge_indexer(resolve_map(cfg.map));
  const GridMap& map = indexer->map();
  const TaskMode mode = cfg.task_mode.value_or(default_task_mode(map));
  SimConfig sim = cfg.sim;
  sim.task_mode = mode;

  write_json(out_dir / "config.json", experiment_config_to_json(cfg));

  json timings = json::object();
  const auto t0 = Clock::now();
  std::ofstream log;
  auto open_log = [&] {
    log.open(out_dir / "optimization_log.jsonl", std::ios::binary);
    if (!log) throw IoError("cannot write optimization log");
  };
  const GenerationCallback on_gen = [&](const GenerationRecord& r) {
    log << to_json(r).dump() << '\n';
    log.flush();
  };

  std::optional<GuidanceGraph> graph;
  std::optional<UpdateModel> model;
  json optimizer = json::object();
  if (cfg.method == "cmaes") {
    open_log();
    CmaesConfig c = cfg.cmaes;
    GgoResult r = optimize_guidance(indexer, sim, c, on_gen);
    optimizer = {{"best_throughput", r.best_throughput}, {"generations", r.history.size()}};
    graph = std::move(r.best);
  } else if (cfg.method == "piu") {
    open_log();
    PiuConfig p = cfg.piu;
    p.sim = sim;
    PiuTrainResult r = optimize_update_model(indexer, p, cfg.cmaes, on_gen);
    optimizer = {{"best_throughput", r.best_throughput}, {"generations", r.history.size()}};
    save_model(out_dir / "model.json", r.model);
    // Final graph is regenerated from θ alone, as any user of the model would.
    p.sim.seed = cfg.eval_seed;
    graph = generate_guidance(r.model.theta, indexer, p);
    model = std::move(r.model);
  } else {
    graph = make_baseline(parse_baseline_method(cfg.method), indexer, mode, cfg.baseline);
  }
  timings["optimization_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  save_guidance(out_dir / "guidance.json", *graph, cfg.bounds);

  SimConfig eval_sim = sim;
  eval_sim.seed = cfg.eval_seed;
  if (cfg.eval_timesteps > 0) eval_sim.timesteps = cfg.eval_timesteps;

  ExperimentOutcome out;
  out.report = evaluate(*graph, eval_sim, cfg.eval_runs, cfg.threads);
  write_json(out_dir / "report.json", report_to_json(out.report));
  export_heatmaps(out.report, *indexer, out_dir / "heatmaps");
  timings["evaluation"] = timings_to_json(out.report);

  json summary = {{"name", cfg.name},
                  {"method", cfg.method},
                  {"map", map.name()},
                  {"edges", indexer->num_edges()},
                  {"optimizer", optimizer},
                  {"result", summary_entry(out.report)},
                  {"compare", json::object()},
                  {"transfer", json::array()}};

  for (const std::string& name : cfg.compare) {
    const GuidanceGraph base =
        make_baseline(parse_baseline_method(name), indexer, mode, cfg.baseline);
    EvalReport rep = evaluate(base, eval_sim, cfg.eval_runs, cfg.threads);
    write_json(out_dir / ("compare-" + name + ".json"), report_to_json(rep));
    json entry = summary_entry(rep);
    if (rep.mean_throughput > 0.0) {
      entry["relative_gain"] = out.report.mean_throughput / rep.mean_throughput - 1.0;
    }
    summary["compare"][name] = entry;
    timings["compare-" + name] = timings_to_json(rep);
    out.comparisons.emplace_back(name, std::move(rep));
  }

  for (std::size_t i = 0; i < cfg.transfers.size(); ++i) {
    const TransferSpec& t = cfg.transfers[i];
    const auto tidx = build_edge_indexer(resolve_map(t.map));
    const TaskMode tmode = cfg.task_mode.value_or(default_task_mode(tidx->map()));
    PiuConfig p = cfg.piu;
    p.sim = sim;
    p.sim.task_mode = tmode;
    p.sim.num_agents = t.agents;
    p.sim.seed = cfg.eval_seed;
    const GuidanceGraph tg = generate_guidance(model->theta, tidx, p);
    const std::string tag = "transfer-" + std::to_string(i);
    save_guidance(out_dir / (tag + "-guidance.json"), tg, cfg.bounds);

    SimConfig tsim = eval_sim;
    tsim.task_mode = tmode;
    tsim.num_agents = t.agents;
    EvalReport rep = evaluate(tg, tsim, cfg.eval_runs, cfg.threads);
    EvalReport base = evaluate(unweighted(tidx), tsim, cfg.eval_runs, cfg.threads);
    write_json(out_dir / (tag + "-report.json"), report_to_json(rep));
    write_json(out_dir / (tag + "-unweighted.json"), report_to_json(base));
    summary["transfer"].push_back({{"map", tidx->map().name()},
                                   {"agents", t.agents},
                                   {"result", summary_entry(rep)},
                                   {"unweighted", summary_entry(base)}});
    out.transfers.emplace_back(tidx->map().name(), std::move(rep));
    out.transfer_baselines.emplace_back(tidx->map().name(), std::move(base));
  }

  write_json(out_dir / "summary.json", summary);
  timings["total_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
  write_json(out_dir / "timings.json", timings);
  return out;
}

}  // namespace ggo
