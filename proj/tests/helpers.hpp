#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ggo/guidance.hpp"
#include "ggo/map.hpp"
#include "ggo/rng.hpp"

namespace ggo::test {

inline std::filesystem::path maps_dir() { return GGO_MAPS_DIR; }

/// Warehouse-format grid from rows, no header.
inline GridMap grid(const std::vector<std::string>& rows, std::string name = "t") {
  std::string text;
  for (const auto& r : rows) text += r + "\n";
  return parse_warehouse(text, std::move(name));
}

inline std::shared_ptr<const EdgeIndexer> indexer(const std::vector<std::string>& rows) {
  return build_edge_indexer(grid(rows));
}

inline std::shared_ptr<const EdgeIndexer> free_indexer(int h, int w) {
  return indexer(std::vector<std::string>(static_cast<std::size_t>(h),
                                          std::string(static_cast<std::size_t>(w), '.')));
}

inline std::vector<double> random_weights(std::size_t n, Rng& rng, double lo = 0.1,
                                          double hi = 100.0) {
  std::vector<double> w(n);
  for (double& x : w) x = rng.uniform(lo, hi);
  return w;
}

}  // namespace ggo::test
