#include <doctest.h>

#include <cmath>

#include "ggo/cmaes.hpp"
#include "ggo/error.hpp"
#include "helpers.hpp"

using namespace ggo;

namespace {

double sphere(const Eigen::VectorXd& x) { return -x.squaredNorm(); }

BatchObjective sphere_batch() {
  return [](int, const std::vector<Eigen::VectorXd>& xs) {
    std::vector<double> f;
    for (const auto& x : xs) f.push_back(sphere(x));
    return f;
  };
}

}  // namespace

TEST_SUITE("cmaes") {

TEST_CASE("projection") {
  CHECK(project(1.5, 0.0, 1.0) == 1.0);
  CHECK(project(-0.2, 0.0, 1.0) == 0.0);
  CHECK(project(0.4, 0.0, 1.0) == 0.4);
}

TEST_CASE("reflection") {
  CHECK(reflect(-0.3, 0.0, 1.0) == 0.3);
  CHECK(reflect(1.25, 0.0, 1.0) == 0.75);
  CHECK(reflect(0.6, 0.0, 1.0) == 0.6);
  // Two mirrors: 2.5 -> -0.5 -> 0.5.
  CHECK(reflect(2.5, 0.0, 1.0) == 0.5);
  CHECK(reflect(1e6 + 0.25, 0.0, 1.0) == doctest::Approx(0.25));
  // Boundary points are fixed by both methods.
  CHECK(reflect(0.0, 0.0, 1.0) == project(0.0, 0.0, 1.0));
  CHECK(reflect(1.0, 0.0, 1.0) == project(1.0, 0.0, 1.0));
}

TEST_CASE("transformation") {
  // l = 0, u = 1: a_l = min(0.5, 1/20) = 0.05, a_u = min(0.5, 2/20) = 0.1.
  const double l = 0.0, u = 1.0, al = 0.05, au = 0.1;
  CHECK(transform(l + al, l, u) == l + al);
  CHECK(transform(u - au, l, u) == u - au);
  CHECK(transform(0.5, l, u) == 0.5);
  // Quadratic bands: l + (x - (l - a))^2 / (4a).
  CHECK(transform(0.0, l, u) == doctest::Approx(0.05 * 0.05 / 0.2).epsilon(1e-15));
  CHECK(transform(-0.05, l, u) == 0.0);
  CHECK(transform(1.0, l, u) == doctest::Approx(1.0 - 0.01 / 0.4).epsilon(1e-15));
  CHECK(transform(1.1, l, u) == 1.0);
  // Beyond the outer band: reflect about [l - a_l, u + a_u] first.
  // -0.1 -> 2(-0.05) + 0.1 = 0 -> 0.0125.
  CHECK(transform(-0.1, l, u) == doctest::Approx(0.0125).epsilon(1e-12));
  // Wide bounds: a_l = (1 + 0.1)/20 = 0.055, a_u = (1 + 100)/20 = 5.05.
  CHECK(transform(0.1 + 0.055, 0.1, 100.0) == 0.1 + 0.055);
  CHECK(transform(100.0 - 5.05, 0.1, 100.0) == 100.0 - 5.05);
}

TEST_CASE("bounds fuzz") {
  Rng rng(4);
  const WeightBounds b{0.1, 100.0};
  for (auto m : {BoundsMethod::Normalization, BoundsMethod::Projection, BoundsMethod::Reflection,
                 BoundsMethod::Transformation}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> raw(40);
      for (double& x : raw) x = rng.normal() * std::pow(10.0, rng.uniform(-1.0, 4.0));
      for (double x : apply_bounds(raw, b, m)) {
        CHECK(x >= b.lb);
        CHECK(x <= b.ub);
      }
    }
    CHECK(parse_bounds_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_bounds_method("resampling"), ConfigError);
  CHECK_THROWS_AS(apply_bounds(std::vector<double>{1.0}, {2.0, 1.0}, BoundsMethod::Projection),
                  ConfigError);
}

TEST_CASE("normalization bounds are scale invariant") {
  Rng rng(8);
  std::vector<double> raw(30);
  for (double& x : raw) x = rng.normal();
  const auto base = apply_bounds(raw, {}, BoundsMethod::Normalization);
  for (double c : {0.5, 2.0, 1024.0}) {
    std::vector<double> s(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) s[i] = c * raw[i];
    CHECK(apply_bounds(s, {}, BoundsMethod::Normalization) == base);
  }
}

TEST_CASE("recombination weights") {
  const GaussianSearch s(Eigen::VectorXd::Zero(3), 1.0, 10, 5);
  const auto w = s.recombination_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sum += w[i];
    CHECK(w[i] > 0.0);
    if (i > 0) CHECK(w[i] < w[i - 1]);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  const double expected0 = std::log(5.5) / (5 * std::log(5.5) - std::lgamma(6.0));
  CHECK(w[0] == doctest::Approx(expected0).epsilon(1e-14));
}

TEST_CASE("sampling") {
  Eigen::VectorXd mu(3);
  mu << 1.0, -2.0, 0.5;
  GaussianSearch tiny(mu, 1e-12, 8, 4);
  Rng r0(1);
  for (const auto& x : tiny.sample(20, r0)) CHECK((x - mu).norm() < 1e-9);

  GaussianSearch s(mu, 1.0, 8, 4);
  Rng r1(2), r2(2);
  const auto a = s.sample(8, r1);
  const auto b = s.sample(8, r2);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  Rng r3(3);
  const auto many = s.sample(10000, r3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (const auto& x : many) mean += x;
  mean /= 10000.0;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - mu[i]) < 4.0 / std::sqrt(10000.0));
}

TEST_CASE("update keeps the mean among the elites") {
  GaussianSearch same(Eigen::VectorXd::Constant(4, 2.0), 0.5, 6, 3);
  std::vector<Eigen::VectorXd> xs(6, Eigen::VectorXd::Constant(4, 2.0));
  same.update(xs, std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(same.mean() == Eigen::VectorXd::Constant(4, 2.0));

  GaussianSearch s(Eigen::VectorXd::Zero(2), 1.0, 6, 3);
  Rng rng(5);
  const auto batch = s.sample_batch(rng);
  std::vector<double> f;
  for (const auto& x : batch) f.push_back(sphere(x));
  s.update(batch, f);
  // Elites: the three highest fitness values; the new mean is a convex
  // combination, so it lies in their bounding box.
  std::vector<std::size_t> order{0, 1, 2, 3, 4, 5};
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] > f[b]; });
  for (int d = 0; d < 2; ++d) {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 3; ++i) {
      lo = std::min(lo, batch[order[static_cast<std::size_t>(i)]][d]);
      hi = std::max(hi, batch[order[static_cast<std::size_t>(i)]][d]);
    }
    CHECK(s.mean()[d] >= lo - 1e-12);
    CHECK(s.mean()[d] <= hi + 1e-12);
  }
  const Eigen::MatrixXd c = s.covariance();
  CHECK((c - c.transpose()).norm() == 0.0);
  CHECK(s.sigma() > 0.0);
}

TEST_CASE("sphere in five dimensions") {
  SearchConfig cfg;
  cfg.iterations = 50;
  cfg.seed = 0;
  const SearchResult r = maximize(Eigen::VectorXd::Ones(5), cfg, sphere_batch());
  CHECK(r.history.size() == 51);
  CHECK(r.best_value > -1e-6);
  CHECK(sphere(r.best) == r.best_value);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].best_ever >= r.history[i - 1].best_ever);
  }
  // Covariance stays positive definite after many lazy decompositions.
  const SearchResult again = maximize(Eigen::VectorXd::Ones(5), cfg, sphere_batch());
  CHECK(again.best == r.best);
}

TEST_CASE("zero iterations returns the initial mean") {
  SearchConfig cfg;
  cfg.iterations = 0;
  const SearchResult r = maximize(Eigen::VectorXd::Constant(3, 0.5), cfg, sphere_batch());
  CHECK(r.history.size() == 1);
  CHECK(r.best == Eigen::VectorXd::Constant(3, 0.5));
  CHECK(r.best_value == -0.75);
}

TEST_CASE("invalid search settings") {
  CHECK_THROWS_AS(GaussianSearch(Eigen::VectorXd::Zero(2), 0.0, 4, 2), ConfigError);
  CHECK_THROWS_AS(GaussianSearch(Eigen::VectorXd::Zero(2), 1.0, 1, 1), ConfigError);
  CHECK_THROWS_AS(GaussianSearch(Eigen::VectorXd::Zero(2), 1.0, 4, 5), ConfigError);
  CHECK_THROWS_AS(GaussianSearch(Eigen::VectorXd(), 1.0, 4, 2), ConfigError);
}

TEST_CASE("evaluate_candidate on the corridor") {
  const auto idx = test::indexer({"ehe"});
  SimConfig sim;
  sim.num_agents = 1;
  sim.timesteps = 100;
  sim.task_mode = TaskMode::WarehouseEndpoints;
  sim.tie_break = TieBreak::VertexId;
  Rng rng(3);
  const GuidanceGraph g(idx, test::random_weights(idx->num_edges(), rng));
  CHECK(evaluate_candidate(g, sim, 1, 9, 0, 0) == 0.5);
  CHECK(evaluate_candidate(g, sim, 7, 9, 2, 3) == 0.5);
  sim.seed = derive_seed(9, {0, 0, 0});
  CHECK(evaluate_candidate(g, sim, 1, 9, 0, 0) == run_simulation(g, sim).throughput);
}

TEST_CASE("direct optimization") {
  const auto idx = build_edge_indexer(generate_random_map(8, 8, 10, 2));
  SimConfig sim;
  sim.num_agents = 12;
  sim.timesteps = 60;
  CmaesConfig cfg;
  cfg.batch = 6;
  cfg.elites = 3;
  cfg.iterations = 3;
  cfg.evals = 2;
  cfg.seed = 11;
  cfg.threads = 2;
  std::vector<GenerationRecord> seen;
  const GgoResult a = optimize_guidance(idx, sim, cfg, [&](const GenerationRecord& r) { seen.push_back(r); });
  CHECK(a.history.size() == 4);
  CHECK(seen.size() == 4);
  for (std::size_t i = 1; i < a.history.size(); ++i) {
    CHECK(a.history[i].best_ever >= a.history[i - 1].best_ever);
  }
  CHECK(a.best_throughput == a.history.back().best_ever);
  for (double w : a.best.weights()) {
    CHECK(w >= cfg.bounds.lb);
    CHECK(w <= cfg.bounds.ub);
  }
  cfg.threads = 1;
  const GgoResult b = optimize_guidance(idx, sim, cfg);
  CHECK(b.best_throughput == a.best_throughput);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(b.history[i].best == a.history[i].best);
    CHECK(b.history[i].mean == a.history[i].mean);
  }

  cfg.iterations = 0;
  const GgoResult zero = optimize_guidance(idx, sim, cfg);
  CHECK(zero.history.size() == 1);
  const double mid = 0.5 * (cfg.bounds.lb + cfg.bounds.ub);
  for (double w : zero.best.weights()) CHECK(w == mid);

  const auto big = build_edge_indexer(generate_random_map(40, 40, 100, 1));
  CHECK_THROWS_AS(optimize_guidance(big, sim, cfg), ConfigError);
}

}  // TEST_SUITE
