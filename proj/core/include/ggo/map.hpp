#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ggo {

enum class TileKind : std::uint8_t { Obstacle, Free, Endpoint, Workstation, Home };

constexpr bool is_traversable(TileKind k) { return k != TileKind::Obstacle; }

/// How agents are placed and how goals are drawn during simulation.
enum class TaskMode {
  UniformRandom,         // start and goals among all traversable tiles
  WarehouseAlternating,  // start anywhere, goals alternate endpoint <-> workstation
  WarehouseEndpoints,    // start at homes, goals among endpoints
};

std::string_view to_string(TaskMode mode);
TaskMode parse_task_mode(std::string_view text);

using VertexId = std::int32_t;
inline constexpr VertexId kNoVertex = -1;

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// 4-neighbour grid. Row 0 is the top row. Traversable tiles are numbered
/// 0..num_vertices()-1 in row-major order and form the MAPF vertex set.
class GridMap {
 public:
  GridMap(std::string name, int height, int width, std::vector<TileKind> tiles);

  const std::string& name() const { return name_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::span<const TileKind> tiles() const { return tiles_; }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  TileKind at(Cell c) const { return tiles_[index(c)]; }
  bool traversable(Cell c) const { return in_bounds(c) && is_traversable(at(c)); }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }

  std::size_t num_vertices() const { return cells_.size(); }
  /// kNoVertex for obstacles and out-of-bounds cells.
  VertexId vertex(Cell c) const { return in_bounds(c) ? vertex_of_tile_[index(c)] : kNoVertex; }
  Cell cell(VertexId v) const { return cells_[static_cast<std::size_t>(v)]; }
  TileKind kind(VertexId v) const { return at(cell(v)); }

  /// Vertices whose tile kind is `k`, ascending.
  std::vector<VertexId> vertices_of(TileKind k) const;
  std::size_t count(TileKind k) const;

  friend bool operator==(const GridMap& a, const GridMap& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.tiles_ == b.tiles_;
  }

 private:
  std::string name_;
  int height_;
  int width_;
  std::vector<TileKind> tiles_;
  std::vector<VertexId> vertex_of_tile_;
  std::vector<Cell> cells_;
};

/// MovingAI benchmark layout: "type", "height", "width", "map" header lines
/// followed by the grid. '.' and 'G' are traversable; '@', 'O' and 'T' are
/// obstacles. Any other character is rejected.
GridMap parse_movingai(std::string_view text, std::string name = {});

/// Warehouse layout: same header as MovingAI with "type warehouse", then rows
/// over '@' obstacle, '.' free, 'e' endpoint, 'w' workstation, 'h' home.
/// A headerless grid is also accepted; dimensions then come from the rows.
GridMap parse_warehouse(std::string_view text, std::string name = {});

std::string serialize_warehouse(const GridMap& map);
/// Only valid for maps with Free/Obstacle tiles.
std::string serialize_movingai(const GridMap& map);

/// Reads either format; the header "type warehouse" selects the warehouse
/// parser. The map name defaults to the file stem.
GridMap load_map(const std::filesystem::path& path);
void save_map(const std::filesystem::path& path, const GridMap& map);

/// Warehouse with `block_rows` x `block_cols` blocks of 1x10 shelves.
///
/// Geometry: a block is 12 rows (four shelf rows spaced three apart) by 11
/// columns (a 10-tile shelf plus one aisle column). Five margin rows sit
/// above the first shelf row and six below the last, two margin columns on
/// each side, giving a (12*block_rows + 9) x (11*block_cols + 3) grid.
/// Every shelf tile has an endpoint directly above and below it;
/// workstations occupy every other row of columns 0 and width-1. The
/// 2x3 instance is the 33x36 warehouse, 3x4 is 45x47 and 7x8 is 93x91.
GridMap generate_scaled_warehouse(int block_rows, int block_cols);

/// Random map with exactly `obstacles` obstacle tiles whose traversable
/// tiles form one 4-connected component (rejection on seeds derived from
/// `seed`). Used as a stand-in for the MovingAI "random" family.
GridMap generate_random_map(int height, int width, std::size_t obstacles, std::uint64_t seed);

/// True when all traversable tiles are 4-connected.
bool is_connected(const GridMap& map);

/// WarehouseAlternating if the map has endpoints and workstations,
/// WarehouseEndpoints if it has homes and endpoints, otherwise UniformRandom.
TaskMode default_task_mode(const GridMap& map);

}  // namespace ggo
