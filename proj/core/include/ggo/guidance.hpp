#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggo/map.hpp"

namespace ggo {

/// Per-vertex actions. The numeric value is also the tensor channel.
enum class Action : std::uint8_t { Right = 0, Left = 1, Up = 2, Down = 3, Wait = 4 };

inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, 4> kMoves = {Action::Right, Action::Left, Action::Up,
                                                 Action::Down};

constexpr Cell apply(Cell c, Action a) {
  switch (a) {
    case Action::Right:
      return {c.row, c.col + 1};
    case Action::Left:
      return {c.row, c.col - 1};
    case Action::Up:
      return {c.row - 1, c.col};
    case Action::Down:
      return {c.row + 1, c.col};
    case Action::Wait:
      break;
  }
  return c;
}

using EdgeId = std::int32_t;
inline constexpr EdgeId kNoEdge = -1;

/// Dense numbering of the guidance-graph edges E_wait ∪ E_move.
///
/// Ids [0, |V|) are the wait edges, so wait_edge(v) == v. Movement edges
/// follow, grouped by source vertex and ordered Right, Left, Up, Down.
class EdgeIndexer {
 public:
  explicit EdgeIndexer(GridMap map);

  const GridMap& map() const { return map_; }

  std::size_t num_edges() const { return sources_.size(); }
  std::size_t num_wait_edges() const { return map_.num_vertices(); }
  std::size_t num_move_edges() const { return num_edges() - num_wait_edges(); }
  std::size_t num_vertices() const { return map_.num_vertices(); }

  /// kNoEdge when the action leaves the map or hits an obstacle.
  EdgeId edge(VertexId v, Action a) const {
    return slots_[static_cast<std::size_t>(v) * kNumActions + static_cast<std::size_t>(a)];
  }
  EdgeId wait_edge(VertexId v) const { return v; }

  VertexId source(EdgeId e) const { return sources_[static_cast<std::size_t>(e)]; }
  VertexId target(EdgeId e) const { return targets_[static_cast<std::size_t>(e)]; }
  Action action(EdgeId e) const { return actions_[static_cast<std::size_t>(e)]; }
  bool is_wait(EdgeId e) const { return static_cast<std::size_t>(e) < num_wait_edges(); }
  /// Opposite movement edge; a wait edge is its own reverse.
  EdgeId reverse(EdgeId e) const { return reverse_[static_cast<std::size_t>(e)]; }

  /// Movement edge from `u` to neighbour `v`, or kNoEdge.
  EdgeId edge_between(VertexId u, VertexId v) const;

 private:
  GridMap map_;
  std::vector<EdgeId> slots_;
  std::vector<VertexId> sources_;
  std::vector<VertexId> targets_;
  std::vector<Action> actions_;
  std::vector<EdgeId> reverse_;
};

std::shared_ptr<const EdgeIndexer> build_edge_indexer(GridMap map);

/// Lower/upper edge-weight bounds.
struct WeightBounds {
  double lb = 0.1;
  double ub = 100.0;
};

/// Edge weights over a shared, immutable indexer. Weights are strictly
/// positive and finite.
class GuidanceGraph {
 public:
  GuidanceGraph(std::shared_ptr<const EdgeIndexer> indexer, std::vector<double> weights);

  static GuidanceGraph uniform(std::shared_ptr<const EdgeIndexer> indexer, double value = 1.0);

  const EdgeIndexer& indexer() const { return *indexer_; }
  const std::shared_ptr<const EdgeIndexer>& shared_indexer() const { return indexer_; }
  const GridMap& map() const { return indexer_->map(); }

  std::span<const double> weights() const { return weights_; }
  double weight(EdgeId e) const { return weights_[static_cast<std::size_t>(e)]; }

  /// Every weight multiplied by c > 0.
  GuidanceGraph scaled(double c) const;

 private:
  std::shared_ptr<const EdgeIndexer> indexer_;
  std::vector<double> weights_;
};

/// h x w x 5 view of a per-edge vector (weights or usage). Channels are
/// Right, Left, Up, Down, Wait. Slots without an edge hold 0.
struct Tensor3 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;  // row-major, channel fastest

  Tensor3() = default;
  Tensor3(int h, int w, int c)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                 static_cast<std::size_t>(c),
             0.0) {}

  double& at(int r, int col, int ch) { return data[offset(r, col, ch)]; }
  double at(int r, int col, int ch) const { return data[offset(r, col, ch)]; }

  std::size_t offset(int r, int col, int ch) const {
    return (static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(ch);
  }
};

using WeightTensor = Tensor3;

WeightTensor vector_to_tensor(const EdgeIndexer& indexer, std::span<const double> per_edge);
WeightTensor vector_to_tensor(const GuidanceGraph& g);
std::vector<double> tensor_to_vector(const WeightTensor& t, const EdgeIndexer& indexer);

/// Affine map of `raw` onto [lb, ub]: min(raw) -> lb, max(raw) -> ub.
/// A constant input maps every entry to (lb + ub) / 2.
std::vector<double> normalize_minmax(std::span<const double> raw, double lb, double ub);

/// Structured-text form: map name and size, bounds, weights indexed by edge
/// id, edge counts, and the tensor view (nested [row][col][channel], null
/// where no edge exists).
nlohmann::json guidance_to_json(const GuidanceGraph& g, const WeightBounds& bounds);
GuidanceGraph guidance_from_json(const nlohmann::json& j,
                                 std::shared_ptr<const EdgeIndexer> indexer);

void save_guidance(const std::filesystem::path& path, const GuidanceGraph& g,
                   const WeightBounds& bounds);
GuidanceGraph load_guidance(const std::filesystem::path& path,
                            std::shared_ptr<const EdgeIndexer> indexer);

}  // namespace ggo
