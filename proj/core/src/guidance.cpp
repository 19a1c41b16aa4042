#include "ggo/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ggo/error.hpp"

namespace ggo {

EdgeIndexer::EdgeIndexer(GridMap map) : map_(std::move(map)) {
  const std::size_t nv = map_.num_vertices();
  slots_.assign(nv * kNumActions, kNoEdge);

  for (std::size_t v = 0; v < nv; ++v) {
    const auto id = static_cast<EdgeId>(v);
    slots_[v * kNumActions + static_cast<std::size_t>(Action::Wait)] = id;
    sources_.push_back(static_cast<VertexId>(v));
    targets_.push_back(static_cast<VertexId>(v));
    actions_.push_back(Action::Wait);
  }
  for (std::size_t v = 0; v < nv; ++v) {
    const Cell c = map_.cell(static_cast<VertexId>(v));
    for (Action a : kMoves) {
      const VertexId u = map_.vertex(apply(c, a));
      if (u == kNoVertex) continue;
      slots_[v * kNumActions + static_cast<std::size_t>(a)] = static_cast<EdgeId>(sources_.size());
      sources_.push_back(static_cast<VertexId>(v));
      targets_.push_back(u);
      actions_.push_back(a);
    }
  }

  reverse_.resize(sources_.size());
  for (std::size_t e = 0; e < sources_.size(); ++e) {
    reverse_[e] = actions_[e] == Action::Wait
                      ? static_cast<EdgeId>(e)
                      : edge_between(targets_[e], sources_[e]);
  }
}

EdgeId EdgeIndexer::edge_between(VertexId u, VertexId v) const {
  for (Action a : kMoves) {
    const EdgeId e = edge(u, a);
    if (e != kNoEdge && target(e) == v) return e;
  }
  return kNoEdge;
}

std::shared_ptr<const EdgeIndexer> build_edge_indexer(GridMap map) {
  return std::make_shared<const EdgeIndexer>(std::move(map));
}

GuidanceGraph::GuidanceGraph(std::shared_ptr<const EdgeIndexer> indexer,
                             std::vector<double> weights)
    : indexer_(std::move(indexer)), weights_(std::move(weights)) {
  if (!indexer_) throw ConfigError("guidance graph requires an edge indexer");
  if (weights_.size() != indexer_->num_edges()) {
    throw ConfigError("weight vector has " + std::to_string(weights_.size()) +
                      " entries, expected " + std::to_string(indexer_->num_edges()));
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw ConfigError("edge " + std::to_string(i) + " has non-positive or non-finite weight");
    }
  }
}

GuidanceGraph GuidanceGraph::uniform(std::shared_ptr<const EdgeIndexer> indexer, double value) {
  const std::size_t n = indexer->num_edges();
  return GuidanceGraph(std::move(indexer), std::vector<double>(n, value));
}

GuidanceGraph GuidanceGraph::scaled(double c) const {
  std::vector<double> w(weights_);
  for (double& x : w) x *= c;
  return GuidanceGraph(indexer_, std::move(w));
}

WeightTensor vector_to_tensor(const EdgeIndexer& indexer, std::span<const double> per_edge) {
  if (per_edge.size() != indexer.num_edges()) {
    throw ConfigError("per-edge vector length does not match the edge indexer");
  }
  const GridMap& map = indexer.map();
  WeightTensor t(map.height(), map.width(), kNumActions);
  for (std::size_t e = 0; e < per_edge.size(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    const Cell c = map.cell(indexer.source(id));
    t.at(c.row, c.col, static_cast<int>(indexer.action(id))) = per_edge[e];
  }
  return t;
}

WeightTensor vector_to_tensor(const GuidanceGraph& g) {
  return vector_to_tensor(g.indexer(), g.weights());
}

std::vector<double> tensor_to_vector(const WeightTensor& t, const EdgeIndexer& indexer) {
  const GridMap& map = indexer.map();
  if (t.height != map.height() || t.width != map.width() || t.channels != kNumActions) {
    throw ConfigError("tensor shape " + std::to_string(t.height) + "x" + std::to_string(t.width) +
                      "x" + std::to_string(t.channels) + " does not match map " +
                      std::to_string(map.height()) + "x" + std::to_string(map.width()) + "x5");
  }
  std::vector<double> out(indexer.num_edges());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    const Cell c = map.cell(indexer.source(id));
    out[e] = t.at(c.row, c.col, static_cast<int>(indexer.action(id)));
  }
  return out;
}

std::vector<double> normalize_minmax(std::span<const double> raw, double lb, double ub) {
  if (raw.empty()) throw ConfigError("cannot normalize an empty vector");
  if (!(lb > 0.0) || !(ub >= lb)) throw ConfigError("bounds must satisfy 0 < lb <= ub");
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("cannot normalize non-finite values");
  std::vector<double> out(raw.size());
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.5 * (lb + ub));
    return out;
  }
  const double range = hi - lo;
  const double span = ub - lb;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == lo) {
      out[i] = lb;
    } else if (raw[i] == hi) {
      out[i] = ub;
    } else {
      out[i] = std::clamp(lb + (raw[i] - lo) / range * span, lb, ub);
    }
  }
  return out;
}

nlohmann::json guidance_to_json(const GuidanceGraph& g, const WeightBounds& bounds) {
  const EdgeIndexer& idx = g.indexer();
  const GridMap& map = idx.map();
  nlohmann::json j;
  j["format"] = "ggo-guidance";
  j["version"] = 1;
  j["map"] = {{"name", map.name()}, {"height", map.height()}, {"width", map.width()}};
  j["bounds"] = {{"lb", bounds.lb}, {"ub", bounds.ub}};
  j["edges"] = {{"total", idx.num_edges()},
                {"wait", idx.num_wait_edges()},
                {"move", idx.num_move_edges()}};
  j["channels"] = {"right", "left", "up", "down", "wait"};
  j["weights"] = std::vector<double>(g.weights().begin(), g.weights().end());

  const WeightTensor t = vector_to_tensor(g);
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < map.height(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < map.width(); ++c) {
      nlohmann::json cell = nlohmann::json::array();
      const VertexId v = map.vertex({r, c});
      for (int ch = 0; ch < kNumActions; ++ch) {
        if (v != kNoVertex && idx.edge(v, static_cast<Action>(ch)) != kNoEdge) {
          cell.push_back(t.at(r, c, ch));
        } else {
          cell.push_back(nullptr);
        }
      }
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  j["tensor"] = std::move(rows);
  return j;
}

GuidanceGraph guidance_from_json(const nlohmann::json& j,
                                 std::shared_ptr<const EdgeIndexer> indexer) {
  try {
    if (j.at("format").get<std::string>() != "ggo-guidance") {
      throw ParseError("not a guidance file (format field)");
    }
    const auto& m = j.at("map");
    const GridMap& map = indexer->map();
    if (m.at("height").get<int>() != map.height() || m.at("width").get<int>() != map.width()) {
      throw ConfigError("guidance file is for a " + std::to_string(m.at("height").get<int>()) +
                        "x" + std::to_string(m.at("width").get<int>()) + " map, got " +
                        std::to_string(map.height()) + "x" + std::to_string(map.width()));
    }
    auto weights = j.at("weights").get<std::vector<double>>();
    return GuidanceGraph(std::move(indexer), std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("guidance file: ") + e.what());
  }
}

void save_guidance(const std::filesystem::path& path, const GuidanceGraph& g,
                   const WeightBounds& bounds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write guidance file '" + path.string() + "'");
  out << guidance_to_json(g, bounds).dump(1) << '\n';
}

GuidanceGraph load_guidance(const std::filesystem::path& path,
                            std::shared_ptr<const EdgeIndexer> indexer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open guidance file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return guidance_from_json(j, std::move(indexer));
}

}  // namespace ggo
