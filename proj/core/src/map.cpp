#include "ggo/map.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "ggo/error.hpp"
#include "ggo/rng.hpp"

namespace ggo {

namespace {

std::string where(std::size_t line, std::size_t col = 0) {
  std::ostringstream os;
  os << "line " << line;
  if (col > 0) os << ", column " << col;
  return os.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  // A trailing newline produces one empty line; drop trailing blanks.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

struct Header {
  std::string type;
  int height = 0;
  int width = 0;
  std::size_t body_start = 0;  // index of the first grid line
};

int parse_dimension(std::string_view line, std::string_view key, std::size_t line_no) {
  line = trim(line);
  if (line.substr(0, key.size()) != key) {
    throw ParseError(where(line_no) + ": expected '" + std::string(key) + " <n>', got '" +
                     std::string(line) + "'");
  }
  std::string_view num = trim(line.substr(key.size()));
  int value = 0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc() || ptr != num.data() + num.size() || value <= 0) {
    throw ParseError(where(line_no) + ": invalid " + std::string(key) + " '" + std::string(num) +
                     "'");
  }
  return value;
}

Header parse_header(const std::vector<std::string_view>& lines) {
  if (lines.size() < 4) throw ParseError(where(lines.size() + 1) + ": truncated header");
  Header h;
  std::string_view type_line = trim(lines[0]);
  if (type_line.substr(0, 4) != "type") {
    throw ParseError(where(1) + ": expected 'type <name>', got '" + std::string(type_line) + "'");
  }
  h.type = std::string(trim(type_line.substr(4)));
  h.height = parse_dimension(lines[1], "height", 2);
  h.width = parse_dimension(lines[2], "width", 3);
  if (trim(lines[3]) != "map") {
    throw ParseError(where(4) + ": expected 'map', got '" + std::string(trim(lines[3])) + "'");
  }
  h.body_start = 4;
  return h;
}

template <class CharMap>
std::vector<TileKind> parse_body(const std::vector<std::string_view>& lines, std::size_t start,
                                 int height, int width, CharMap&& to_tile) {
  const std::size_t rows = lines.size() - start;
  if (rows != static_cast<std::size_t>(height)) {
    throw ParseError(where(start + 1) + ": declared height " + std::to_string(height) +
                     " but grid has " + std::to_string(rows) + " rows");
  }
  std::vector<TileKind> tiles;
  tiles.reserve(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  for (std::size_t r = 0; r < rows; ++r) {
    std::string_view row = lines[start + r];
    const std::size_t line_no = start + r + 1;
    if (row.size() != static_cast<std::size_t>(width)) {
      throw ParseError(where(line_no) + ": expected " + std::to_string(width) +
                       " columns, got " + std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::optional<TileKind> k = to_tile(row[c]);
      if (!k) {
        throw ParseError(where(line_no, c + 1) + ": unknown tile character '" +
                         std::string(1, row[c]) + "'");
      }
      tiles.push_back(*k);
    }
  }
  return tiles;
}

std::optional<TileKind> movingai_tile(char ch) {
  switch (ch) {
    case '.':
    case 'G':
      return TileKind::Free;
    case '@':
    case 'O':
    case 'T':
      return TileKind::Obstacle;
    default:
      return std::nullopt;
  }
}

std::optional<TileKind> warehouse_tile(char ch) {
  switch (ch) {
    case '.':
      return TileKind::Free;
    case '@':
      return TileKind::Obstacle;
    case 'e':
      return TileKind::Endpoint;
    case 'w':
      return TileKind::Workstation;
    case 'h':
      return TileKind::Home;
    default:
      return std::nullopt;
  }
}

char warehouse_char(TileKind k) {
  switch (k) {
    case TileKind::Obstacle:
      return '@';
    case TileKind::Free:
      return '.';
    case TileKind::Endpoint:
      return 'e';
    case TileKind::Workstation:
      return 'w';
    case TileKind::Home:
      return 'h';
  }
  return '?';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open map file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(TaskMode mode) {
  switch (mode) {
    case TaskMode::UniformRandom:
      return "uniform";
    case TaskMode::WarehouseAlternating:
      return "warehouse-alternating";
    case TaskMode::WarehouseEndpoints:
      return "warehouse-endpoints";
  }
  return "?";
}

TaskMode parse_task_mode(std::string_view text) {
  if (text == "uniform") return TaskMode::UniformRandom;
  if (text == "warehouse-alternating") return TaskMode::WarehouseAlternating;
  if (text == "warehouse-endpoints") return TaskMode::WarehouseEndpoints;
  throw ConfigError("unknown task mode '" + std::string(text) +
                    "' (expected uniform, warehouse-alternating or warehouse-endpoints)");
}

GridMap::GridMap(std::string name, int height, int width, std::vector<TileKind> tiles)
    : name_(std::move(name)), height_(height), width_(width), tiles_(std::move(tiles)) {
  if (height_ < 1 || width_ < 1) throw ConfigError("map dimensions must be positive");
  if (tiles_.size() != static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_)) {
    throw ConfigError("tile count does not match map dimensions");
  }
  vertex_of_tile_.assign(tiles_.size(), kNoVertex);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      const std::size_t i = index({r, c});
      if (is_traversable(tiles_[i])) {
        vertex_of_tile_[i] = static_cast<VertexId>(cells_.size());
        cells_.push_back({r, c});
      }
    }
  }
  if (cells_.empty()) throw ConfigError("map '" + name_ + "' has no traversable tile");
}

std::vector<VertexId> GridMap::vertices_of(TileKind k) const {
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < cells_.size(); ++v) {
    if (at(cells_[v]) == k) out.push_back(static_cast<VertexId>(v));
  }
  return out;
}

std::size_t GridMap::count(TileKind k) const {
  return static_cast<std::size_t>(std::count(tiles_.begin(), tiles_.end(), k));
}

GridMap parse_movingai(std::string_view text, std::string name) {
  const auto lines = split_lines(text);
  const Header h = parse_header(lines);
  auto tiles = parse_body(lines, h.body_start, h.height, h.width, movingai_tile);
  return GridMap(std::move(name), h.height, h.width, std::move(tiles));
}

GridMap parse_warehouse(std::string_view text, std::string name) {
  const auto lines = split_lines(text);
  if (!lines.empty() && trim(lines[0]).substr(0, 4) == "type") {
    const Header h = parse_header(lines);
    auto tiles = parse_body(lines, h.body_start, h.height, h.width, warehouse_tile);
    return GridMap(std::move(name), h.height, h.width, std::move(tiles));
  }
  if (lines.empty()) throw ParseError(where(1) + ": empty warehouse map");
  const int height = static_cast<int>(lines.size());
  const int width = static_cast<int>(lines[0].size());
  if (width == 0) throw ParseError(where(1) + ": empty row");
  auto tiles = parse_body(lines, 0, height, width, warehouse_tile);
  return GridMap(std::move(name), height, width, std::move(tiles));
}

std::string serialize_warehouse(const GridMap& map) {
  std::string out = "type warehouse\nheight " + std::to_string(map.height()) + "\nwidth " +
                    std::to_string(map.width()) + "\nmap\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) out.push_back(warehouse_char(map.at({r, c})));
    out.push_back('\n');
  }
  return out;
}

std::string serialize_movingai(const GridMap& map) {
  std::string out = "type octile\nheight " + std::to_string(map.height()) + "\nwidth " +
                    std::to_string(map.width()) + "\nmap\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const TileKind k = map.at({r, c});
      if (k != TileKind::Free && k != TileKind::Obstacle) {
        throw ConfigError("MovingAI format cannot encode warehouse tile kinds");
      }
      out.push_back(k == TileKind::Free ? '.' : '@');
    }
    out.push_back('\n');
  }
  return out;
}

GridMap load_map(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string name = path.stem().string();
  std::string_view first = text;
  first = trim(first.substr(0, first.find('\n')));
  if (!first.empty() && first.back() == '\r') first.remove_suffix(1);
  try {
    if (first == "type warehouse" || first.substr(0, 4) != "type") {
      return parse_warehouse(text, name);
    }
    return parse_movingai(text, name);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_map(const std::filesystem::path& path, const GridMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write map file '" + path.string() + "'");
  out << serialize_warehouse(map);
}

GridMap generate_scaled_warehouse(int block_rows, int block_cols) {
  if (block_rows < 1 || block_cols < 1) {
    throw ConfigError("warehouse block counts must be at least 1");
  }
  constexpr int kShelfLength = 10;
  constexpr int kRowsPerBlock = 12;
  constexpr int kColsPerBlock = kShelfLength + 1;
  constexpr int kTopMargin = 5;
  constexpr int kSideMargin = 2;
  const int height = kRowsPerBlock * block_rows + 9;
  const int width = kColsPerBlock * block_cols + 3;

  std::vector<TileKind> tiles(static_cast<std::size_t>(height) * static_cast<std::size_t>(width),
                              TileKind::Free);
  auto at = [&](int r, int c) -> TileKind& {
    return tiles[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(c)];
  };

  const int shelf_rows = 4 * block_rows;
  for (int s = 0; s < shelf_rows; ++s) {
    const int r = kTopMargin + 3 * s;
    for (int b = 0; b < block_cols; ++b) {
      const int c0 = kSideMargin + kColsPerBlock * b;
      for (int c = c0; c < c0 + kShelfLength; ++c) {
        at(r, c) = TileKind::Obstacle;
        at(r - 1, c) = TileKind::Endpoint;
        at(r + 1, c) = TileKind::Endpoint;
      }
    }
  }
  for (int r = 1; r < height - 1; r += 2) {
    at(r, 0) = TileKind::Workstation;
    at(r, width - 1) = TileKind::Workstation;
  }
  return GridMap("warehouse-" + std::to_string(height) + "-" + std::to_string(width), height,
                 width, std::move(tiles));
}

bool is_connected(const GridMap& map) {
  const std::size_t n = map.num_vertices();
  std::vector<char> seen(n, 0);
  std::vector<VertexId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  constexpr int dr[4] = {0, 0, -1, 1};
  constexpr int dc[4] = {1, -1, 0, 0};
  while (!stack.empty()) {
    const Cell c = map.cell(stack.back());
    stack.pop_back();
    for (int k = 0; k < 4; ++k) {
      const VertexId u = map.vertex({c.row + dr[k], c.col + dc[k]});
      if (u != kNoVertex && !seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == n;
}

GridMap generate_random_map(int height, int width, std::size_t obstacles, std::uint64_t seed) {
  if (height < 1 || width < 1) throw ConfigError("map dimensions must be positive");
  const std::size_t cells = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (obstacles >= cells) throw ConfigError("obstacle count must leave a traversable tile");
  const std::string name = "random-" + std::to_string(height) + "-" + std::to_string(width) +
                           "-o" + std::to_string(obstacles) + "-s" + std::to_string(seed);
  constexpr int kMaxAttempts = 100000;
  for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, {attempt}));
    std::vector<std::size_t> order(cells);
    for (std::size_t i = 0; i < cells; ++i) order[i] = i;
    std::vector<TileKind> tiles(cells, TileKind::Free);
    for (std::size_t i = 0; i < obstacles; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(cells - i));
      std::swap(order[i], order[j]);
      tiles[order[i]] = TileKind::Obstacle;
    }
    GridMap map(name, height, width, std::move(tiles));
    if (is_connected(map)) return map;
  }
  throw ConfigError("could not generate a connected random map; lower the obstacle count");
}

TaskMode default_task_mode(const GridMap& map) {
  const std::size_t endpoints = map.count(TileKind::Endpoint);
  if (endpoints > 0 && map.count(TileKind::Workstation) > 0) return TaskMode::WarehouseAlternating;
  if (endpoints > 0 && map.count(TileKind::Home) > 0) return TaskMode::WarehouseEndpoints;
  return TaskMode::UniformRandom;
}

}  // namespace ggo
