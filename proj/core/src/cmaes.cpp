#include "ggo/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ggo/error.hpp"
#include "ggo/parallel.hpp"

namespace ggo {

namespace {

constexpr double kEigenFloor = 1e-12;
constexpr int kMaxReflections = 64;

// Triangle-wave fold of x into [l, u]; same result as repeated mirroring.
double fold(double x, double l, double u) {
  const double width = u - l;
  const double period = 2.0 * width;
  double y = std::fmod(x - l, period);
  if (y < 0.0) y += period;
  if (y > width) y = period - y;
  return l + y;
}

}  // namespace

std::string_view to_string(BoundsMethod m) {
  switch (m) {
    case BoundsMethod::Normalization:
      return "normalization";
    case BoundsMethod::Projection:
      return "projection";
    case BoundsMethod::Reflection:
      return "reflection";
    case BoundsMethod::Transformation:
      return "transformation";
  }
  return "unknown";
}

BoundsMethod parse_bounds_method(std::string_view text) {
  for (auto m : {BoundsMethod::Normalization, BoundsMethod::Projection, BoundsMethod::Reflection,
                 BoundsMethod::Transformation}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown bounds method '" + std::string(text) + "'");
}

double project(double x, double l, double u) { return std::clamp(x, l, u); }

double reflect(double x, double l, double u) {
  for (int i = 0; i < kMaxReflections; ++i) {
    if (x < l) {
      x = 2.0 * l - x;
    } else if (x > u) {
      x = 2.0 * u - x;
    } else {
      return x;
    }
  }
  return fold(x, l, u);
}

double transform(double x, double l, double u) {
  const double al = std::min((u - l) / 2.0, (1.0 + std::abs(l)) / 20.0);
  const double au = std::min((u - l) / 2.0, (1.0 + std::abs(u)) / 20.0);
  if (x < l - al || x > u + au) x = reflect(x, l - al, u + au);
  if (x < l + al) return l + (x - (l - al)) * (x - (l - al)) / (4.0 * al);
  if (x > u - au) return u - (x - (u + au)) * (x - (u + au)) / (4.0 * au);
  return x;
}

std::vector<double> apply_bounds(std::span<const double> raw, const WeightBounds& bounds,
                                 BoundsMethod method) {
  if (!(bounds.lb < bounds.ub)) throw ConfigError("bounds need lb < ub");
  if (method == BoundsMethod::Normalization) return normalize_minmax(raw, bounds.lb, bounds.ub);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    switch (method) {
      case BoundsMethod::Projection:
        out[i] = project(raw[i], bounds.lb, bounds.ub);
        break;
      case BoundsMethod::Reflection:
        out[i] = reflect(raw[i], bounds.lb, bounds.ub);
        break;
      case BoundsMethod::Transformation:
        out[i] = transform(raw[i], bounds.lb, bounds.ub);
        break;
      case BoundsMethod::Normalization:
        break;
    }
  }
  return out;
}

GaussianSearch::GaussianSearch(Eigen::VectorXd mean, double sigma, int lambda, int mu)
    : mean_(std::move(mean)), sigma_(sigma), lambda_(lambda), mu_(mu) {
  const auto n = static_cast<double>(mean_.size());
  if (mean_.size() == 0) throw ConfigError("search dimension must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
  if (lambda < 2) throw ConfigError("batch size must be at least 2");
  if (mu < 1 || mu > lambda) throw ConfigError("elites must be in [1, batch]");

  weights_.resize(static_cast<std::size_t>(mu));
  for (int i = 0; i < mu; ++i) {
    weights_[static_cast<std::size_t>(i)] = std::log(mu + 0.5) - std::log(i + 1.0);
  }
  const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  double sq = 0.0;
  for (double& w : weights_) {
    w /= sum;
    sq += w * w;
  }
  mu_eff_ = 1.0 / sq;

  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
  c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_,
                   2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  const Eigen::Index d = mean_.size();
  cov_ = Eigen::MatrixXd::Identity(d, d);
  scales_ = Eigen::VectorXd::Ones(d);
  p_sigma_ = Eigen::VectorXd::Zero(d);
  p_c_ = Eigen::VectorXd::Zero(d);
}

Eigen::MatrixXd GaussianSearch::covariance() const {
  Eigen::MatrixXd full = cov_.selfadjointView<Eigen::Lower>();
  return full;
}

std::vector<Eigen::VectorXd> GaussianSearch::sample(int count, Rng& rng) {
  const Eigen::Index d = mean_.size();
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(std::max(0, count)));
  Eigen::VectorXd z(d);
  for (int k = 0; k < count; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
    if (identity_) {
      out.emplace_back(mean_ + sigma_ * z);
    } else {
      out.emplace_back(mean_ + sigma_ * (basis_ * scales_.cwiseProduct(z)));
    }
  }
  return out;
}

void GaussianSearch::decompose() {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_);
  if (solver.info() != Eigen::Success) throw ConfigError("covariance eigendecomposition failed");
  Eigen::VectorXd values = solver.eigenvalues().cwiseMax(kEigenFloor);
  basis_ = solver.eigenvectors();
  scales_ = values.cwiseSqrt();
  // Rebuild so the stored matrix matches the floored spectrum.
  cov_ = basis_ * values.asDiagonal() * basis_.transpose();
  identity_ = false;
  eigen_generation_ = generation_;
}

void GaussianSearch::update(const std::vector<Eigen::VectorXd>& samples,
                            std::span<const double> fitness) {
  if (samples.size() != fitness.size()) throw ConfigError("samples and fitness differ in size");
  if (samples.size() < static_cast<std::size_t>(mu_)) throw ConfigError("fewer samples than elites");
  const Eigen::Index d = mean_.size();
  const auto n = static_cast<double>(d);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

  const Eigen::VectorXd old_mean = mean_;
  Eigen::MatrixXd y(d, mu_);
  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < mu_; ++i) {
    const Eigen::VectorXd& x = samples[order[static_cast<std::size_t>(i)]];
    const double w = weights_[static_cast<std::size_t>(i)];
    y.col(i) = (x - old_mean) / sigma_;
    new_mean += w * x;
    y_w += w * y.col(i);
  }
  mean_ = new_mean;

  // C^{-1/2} y_w
  Eigen::VectorXd whitened;
  if (identity_) {
    whitened = y_w;
  } else {
    whitened = basis_ * (basis_.transpose() * y_w).cwiseQuotient(scales_);
  }
  p_sigma_ = (1.0 - c_sigma_) * p_sigma_ +
             std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * whitened;
  ++generation_;
  const double ps_norm = p_sigma_.norm();
  const double correction = std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
  const bool h_sigma = ps_norm / correction < (1.4 + 2.0 / (n + 1.0)) * chi_n_;
  p_c_ = (1.0 - c_c_) * p_c_;
  if (h_sigma) p_c_ += std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * y_w;
  const double delta = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);

  cov_ *= 1.0 + c_1_ * delta - c_1_ - c_mu_;
  auto lower = cov_.selfadjointView<Eigen::Lower>();
  lower.rankUpdate(p_c_, c_1_);
  Eigen::MatrixXd y_scaled = y;
  for (int i = 0; i < mu_; ++i) y_scaled.col(i) *= std::sqrt(weights_[static_cast<std::size_t>(i)]);
  lower.rankUpdate(y_scaled, c_mu_);
  // Keep the strict upper triangle consistent for callers and the solver.
  cov_.triangularView<Eigen::StrictlyUpper>() = cov_.transpose();

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

  const double gap = lambda_ / (c_1_ + c_mu_) / n / 10.0;
  if (generation_ - eigen_generation_ > gap) decompose();
}

nlohmann::json to_json(const GenerationRecord& r) {
  return {{"generation", r.generation},
          {"best", r.best},
          {"mean", r.mean},
          {"best_ever", r.best_ever}};
}

SearchResult maximize(Eigen::VectorXd mean0, const SearchConfig& cfg,
                      const BatchObjective& objective, const GenerationCallback& on_generation) {
  if (cfg.iterations < 0) throw ConfigError("iterations must be non-negative");
  GaussianSearch search(std::move(mean0), cfg.sigma0, cfg.batch, std::min(cfg.elites, cfg.batch));
  SearchResult result;

  const std::vector<Eigen::VectorXd> initial{search.mean()};
  const std::vector<double> f0 = objective(0, initial);
  result.best = search.mean();
  result.best_value = f0.at(0);
  GenerationRecord r0{0, f0[0], f0[0], f0[0]};
  result.history.push_back(r0);
  if (on_generation) on_generation(r0);

  for (int gen = 1; gen <= cfg.iterations; ++gen) {
    Rng rng(derive_seed(cfg.seed, {4, static_cast<std::uint64_t>(gen)}));
    const std::vector<Eigen::VectorXd> xs = search.sample_batch(rng);
    const std::vector<double> f = objective(gen, xs);
    if (f.size() != xs.size()) throw ConfigError("objective returned the wrong number of values");
    GenerationRecord rec;
    rec.generation = gen;
    rec.best = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      total += f[k];
      if (f[k] > rec.best) rec.best = f[k];
      if (f[k] > result.best_value) {
        result.best_value = f[k];
        result.best = xs[k];
      }
    }
    rec.mean = total / static_cast<double>(f.size());
    rec.best_ever = result.best_value;
    result.history.push_back(rec);
    if (on_generation) on_generation(rec);
    search.update(xs, f);
  }
  result.final_mean = search.mean();
  return result;
}

double evaluate_candidate(const GuidanceGraph& g, const SimConfig& sim, int evals,
                          std::uint64_t seed, std::uint64_t generation, std::uint64_t candidate) {
  if (evals < 1) throw ConfigError("evals must be at least 1");
  double total = 0.0;
  for (int run = 0; run < evals; ++run) {
    SimConfig c = sim;
    c.seed = derive_seed(seed, {generation, candidate, static_cast<std::uint64_t>(run)});
    total += run_simulation(g, c).throughput;
  }
  return total / evals;
}

GgoResult optimize_guidance(std::shared_ptr<const EdgeIndexer> indexer, const SimConfig& sim,
                            const CmaesConfig& cfg, const GenerationCallback& on_generation) {
  const std::size_t n = indexer->num_edges();
  if (n > kMaxDirectDimension) {
    throw ConfigError("guidance graph has " + std::to_string(n) + " edges; direct optimization " +
                      "supports at most " + std::to_string(kMaxDirectDimension) +
                      ", use the update-model optimizer instead");
  }
  if (cfg.evals < 1) throw ConfigError("evals must be at least 1");
  const WeightBounds bounds = cfg.bounds;
  const BoundsMethod method = cfg.method;

  auto to_graph = [&](const Eigen::VectorXd& raw) {
    std::vector<double> w =
        apply_bounds(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())),
                     bounds, method);
    return GuidanceGraph(indexer, std::move(w));
  };

  const BatchObjective objective = [&](int gen, const std::vector<Eigen::VectorXd>& xs) {
    std::vector<double> f(xs.size(), 0.0);
    const std::size_t runs = static_cast<std::size_t>(cfg.evals);
    std::vector<double> scores(xs.size() * runs, 0.0);
    std::vector<std::unique_ptr<GuidanceGraph>> graphs(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      graphs[k] = std::make_unique<GuidanceGraph>(to_graph(xs[k]));
    }
    parallel_for(scores.size(), cfg.threads, [&](std::size_t job) {
      const std::size_t k = job / runs;
      const std::size_t run = job % runs;
      SimConfig c = sim;
      c.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(gen), k, run});
      scores[job] = run_simulation(*graphs[k], c).throughput;
    });
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double total = 0.0;
      for (std::size_t run = 0; run < runs; ++run) total += scores[k * runs + run];
      f[k] = total / static_cast<double>(runs);
    }
    return f;
  };

  SearchConfig sc;
  sc.batch = cfg.batch;
  sc.iterations = cfg.iterations;
  sc.elites = cfg.elites;
  sc.sigma0 = cfg.sigma0 > 0.0 ? cfg.sigma0 : 0.2 * (bounds.ub - bounds.lb);
  sc.seed = cfg.seed;
  SearchResult sr = maximize(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), sc, objective,
                             on_generation);
  return GgoResult{to_graph(sr.best), sr.best_value, std::move(sr.history)};
}

}  // namespace ggo
