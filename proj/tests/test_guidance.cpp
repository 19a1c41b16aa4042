#include <doctest.h>

#include <cmath>
#include <set>

#include "ggo/error.hpp"
#include "ggo/guidance.hpp"
#include "helpers.hpp"

using namespace ggo;

TEST_SUITE("guidance") {

TEST_CASE("one-by-two map") {
  const auto idx = test::free_indexer(1, 2);
  CHECK(idx->num_wait_edges() == 2);
  CHECK(idx->num_move_edges() == 2);
  CHECK(idx->num_edges() == 4);
  // Hand enumeration: 0,1 wait; 2 = (0,0)->(0,1) right; 3 = (0,1)->(0,0) left.
  CHECK(idx->edge(0, Action::Right) == 2);
  CHECK(idx->edge(1, Action::Left) == 3);
  CHECK(idx->edge(0, Action::Left) == kNoEdge);
  CHECK(idx->reverse(2) == 3);
  CHECK(idx->reverse(0) == 0);

  const GuidanceGraph g(idx, {1.0, 2.0, 3.0, 4.0});
  const WeightTensor t = vector_to_tensor(g);
  CHECK(t.at(0, 0, 0) == 3.0);  // right channel of (0,0)
  CHECK(t.at(0, 1, 1) == 4.0);  // left channel of (0,1)
  CHECK(t.at(0, 0, 4) == 1.0);
  CHECK(t.at(0, 1, 4) == 2.0);
  CHECK(t.at(0, 0, 1) == 0.0);  // placeholder
}

TEST_CASE("indexer invariants") {
  for (const auto& rows : {std::vector<std::string>{"....", ".@@.", "...."},
                           std::vector<std::string>{".@.", "@.@", ".@."},
                           std::vector<std::string>{"e..w", "h@@.", "...."}}) {
    const auto idx = test::indexer(rows);
    const GridMap& m = idx->map();
    CHECK(idx->num_edges() == idx->num_wait_edges() + idx->num_move_edges());
    CHECK(idx->num_wait_edges() == m.num_vertices());
    std::size_t adjacencies = 0;
    for (VertexId v = 0; v < static_cast<VertexId>(m.num_vertices()); ++v) {
      CHECK(idx->wait_edge(v) == v);
      if (m.vertex(apply(m.cell(v), Action::Right)) != kNoVertex) ++adjacencies;
      if (m.vertex(apply(m.cell(v), Action::Down)) != kNoVertex) ++adjacencies;
    }
    CHECK(idx->num_move_edges() == 2 * adjacencies);
    for (EdgeId e = 0; e < static_cast<EdgeId>(idx->num_edges()); ++e) {
      const Cell s = m.cell(idx->source(e));
      const Cell t = m.cell(idx->target(e));
      CHECK(m.traversable(s));
      CHECK(m.traversable(t));
      const int d = std::abs(s.row - t.row) + std::abs(s.col - t.col);
      CHECK(d == (idx->is_wait(e) ? 0 : 1));
      CHECK(idx->edge(idx->source(e), idx->action(e)) == e);
      CHECK(idx->reverse(idx->reverse(e)) == e);
    }
  }
}

TEST_CASE("shipped warehouse edge counts") {
  const auto idx = build_edge_indexer(load_map(test::maps_dir() / "warehouse-33-36.map"));
  CHECK(idx->num_edges() == 4074);
  CHECK(idx->num_wait_edges() == 948);
  CHECK(idx->num_move_edges() == 3126);
  const auto small = build_edge_indexer(load_map(test::maps_dir() / "warehouse-20-17.map"));
  CHECK(small->num_edges() == 1478);
  CHECK(small->num_wait_edges() == 320);
  CHECK(small->num_move_edges() == 1158);
}

TEST_CASE("tensor round trip") {
  const auto idx = test::indexer({"...", ".@.", "..."});
  Rng rng(11);
  const GuidanceGraph g(idx, test::random_weights(idx->num_edges(), rng));
  const WeightTensor t = vector_to_tensor(g);
  CHECK(t.height == 3);
  CHECK(t.width == 3);
  CHECK(t.channels == 5);
  const auto back = tensor_to_vector(t, *idx);
  CHECK(back == std::vector<double>(g.weights().begin(), g.weights().end()));

  const WeightTensor ones = vector_to_tensor(GuidanceGraph::uniform(idx));
  for (VertexId v = 0; v < static_cast<VertexId>(idx->num_vertices()); ++v) {
    const Cell c = idx->map().cell(v);
    for (int a = 0; a < kNumActions; ++a) {
      const bool valid = idx->edge(v, static_cast<Action>(a)) != kNoEdge;
      CHECK(ones.at(c.row, c.col, a) == (valid ? 1.0 : 0.0));
    }
  }
  for (int ch = 0; ch < 5; ++ch) CHECK(ones.at(1, 1, ch) == 0.0);  // obstacle

  CHECK_THROWS_AS(tensor_to_vector(WeightTensor(2, 3, 5), *idx), ConfigError);
}

TEST_CASE("normalize_minmax examples") {
  CHECK(normalize_minmax(std::vector<double>{0.0, 1.0}, 0.1, 1.0) == std::vector<double>{0.1, 1.0});
  const auto c = normalize_minmax(std::vector<double>{5.0, 5.0, 5.0}, 0.1, 1.0);
  for (double x : c) CHECK(x == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(normalize_minmax(std::vector<double>{-2.0, 0.0, 2.0}, 1.0, 3.0) ==
        std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(normalize_minmax(std::vector<double>{}, 1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(normalize_minmax(std::vector<double>{1.0}, 0.0, 2.0), ConfigError);
}

TEST_CASE("normalize_minmax affine idempotence") {
  Rng rng(5);
  // Exact for any real input when C is a power of two and D = 0.
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> raw(50);
    for (double& x : raw) x = rng.normal() * 10.0;
    const double c = std::ldexp(1.0, static_cast<int>(rng.below(40)) - 20);
    std::vector<double> scaled(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = c * raw[i];
    CHECK(normalize_minmax(scaled, 0.1, 100.0) == normalize_minmax(raw, 0.1, 100.0));
  }
  // Exact for any C > 0 and D when the affine image is exactly representable.
  for (double c : {0.5, 3.0, 10.0, 7.0}) {
    for (double d : {-7.0, 0.0, 1000.0}) {
      std::vector<double> raw(40), mapped(40);
      for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = static_cast<double>(rng.below(2000)) - 1000.0;
        mapped[i] = c * raw[i] + d;
      }
      CHECK(normalize_minmax(mapped, 0.1, 100.0) == normalize_minmax(raw, 0.1, 100.0));
    }
  }
  // Otherwise agreement to rounding.
  std::vector<double> raw(100), mapped(100);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = rng.uniform(-5.0, 5.0);
    mapped[i] = 0.37 * raw[i] + 12.5;
  }
  const auto a = normalize_minmax(raw, 0.1, 100.0);
  const auto b = normalize_minmax(mapped, 0.1, 100.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("normalize_minmax stays in bounds") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> raw(30);
    for (double& x : raw) x = rng.normal() * std::pow(10.0, rng.uniform(-3, 3));
    const auto out = normalize_minmax(raw, 0.1, 100.0);
    for (double x : out) {
      CHECK(x >= 0.1);
      CHECK(x <= 100.0);
    }
    CHECK(*std::min_element(out.begin(), out.end()) == 0.1);
    CHECK(*std::max_element(out.begin(), out.end()) == 100.0);
  }
}

TEST_CASE("guidance graph validation and serialization") {
  const auto idx = test::indexer({"..", ".@"});
  CHECK_THROWS_AS(GuidanceGraph(idx, {1.0, 1.0}), ConfigError);
  std::vector<double> w(idx->num_edges(), 1.0);
  w[3] = 0.0;
  CHECK_THROWS_AS(GuidanceGraph(idx, w), ConfigError);
  w[3] = 2.5;
  const GuidanceGraph g(idx, w);
  const GuidanceGraph back = guidance_from_json(guidance_to_json(g, {}), idx);
  CHECK(std::vector<double>(back.weights().begin(), back.weights().end()) == w);
  const auto other = test::free_indexer(3, 3);
  CHECK_THROWS_AS(guidance_from_json(guidance_to_json(g, {}), other), ConfigError);

  const GuidanceGraph s = g.scaled(3.0);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(s.weights()[i] == 3.0 * w[i]);
}

}  // TEST_SUITE
