#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ggo/guidance.hpp"
#include "ggo/rng.hpp"
#include "ggo/simulator.hpp"

namespace ggo {

enum class BoundsMethod { Normalization, Projection, Reflection, Transformation };

std::string_view to_string(BoundsMethod m);
BoundsMethod parse_bounds_method(std::string_view text);

/// Clamp to [l, u].
double project(double x, double l, double u);

/// Mirror at l (x -> 2l - x) or u (x -> 2u - x) until inside [l, u].
double reflect(double x, double l, double u);

/// Identity on [l + a_l, u - a_u], quadratic blends on the outer bands,
/// reflection about [l - a_l, u + a_u] first when further out, with
/// a_l = min((u - l)/2, (1 + |l|)/20) and a_u = min((u - l)/2, (1 + |u|)/20).
double transform(double x, double l, double u);

/// Maps a raw sample into [bounds.lb, bounds.ub]. Normalization works on the
/// whole vector (min-max); the other methods act per coordinate.
std::vector<double> apply_bounds(std::span<const double> raw, const WeightBounds& bounds,
                                 BoundsMethod method);

/// Rank-μ CMA-ES state with cumulative step-size adaptation. Maximizes.
class GaussianSearch {
 public:
  GaussianSearch(Eigen::VectorXd mean, double sigma, int lambda, int mu);

  int dimension() const { return static_cast<int>(mean_.size()); }
  int lambda() const { return lambda_; }
  int mu() const { return mu_; }
  int generation() const { return generation_; }
  double sigma() const { return sigma_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Full symmetric covariance (without σ²).
  Eigen::MatrixXd covariance() const;
  std::span<const double> recombination_weights() const { return weights_; }

  /// `count` independent draws from N(mean, σ² C).
  std::vector<Eigen::VectorXd> sample(int count, Rng& rng);
  std::vector<Eigen::VectorXd> sample_batch(Rng& rng) { return sample(lambda_, rng); }

  /// One generation update from at least μ samples and their fitness
  /// (higher is better, ties broken by sample index).
  void update(const std::vector<Eigen::VectorXd>& samples, std::span<const double> fitness);

 private:
  void decompose();

  Eigen::VectorXd mean_;
  double sigma_;
  int lambda_;
  int mu_;
  int generation_ = 0;
  int eigen_generation_ = 0;

  std::vector<double> weights_;
  double mu_eff_ = 0.0;
  double c_sigma_ = 0.0;
  double d_sigma_ = 0.0;
  double c_c_ = 0.0;
  double c_1_ = 0.0;
  double c_mu_ = 0.0;
  double chi_n_ = 0.0;

  Eigen::MatrixXd cov_;  // lower triangle authoritative
  Eigen::MatrixXd basis_;
  Eigen::VectorXd scales_;  // sqrt of eigenvalues
  bool identity_ = true;    // no decomposition yet: basis is I, scales are 1
  Eigen::VectorXd p_sigma_;
  Eigen::VectorXd p_c_;
};

struct GenerationRecord {
  int generation = 0;  // 0 is the initial mean
  double best = 0.0;
  double mean = 0.0;
  double best_ever = 0.0;
};

nlohmann::json to_json(const GenerationRecord& r);

struct SearchConfig {
  int batch = 100;
  int iterations = 100;
  int elites = 50;
  double sigma0 = 1.0;
  std::uint64_t seed = 0;
};

struct SearchResult {
  Eigen::VectorXd best;  // raw (unbounded) sample
  double best_value = 0.0;
  std::vector<GenerationRecord> history;
  Eigen::VectorXd final_mean;
};

/// Scores a batch of raw samples; `generation` is 0 for the initial mean.
using BatchObjective =
    std::function<std::vector<double>(int generation, const std::vector<Eigen::VectorXd>& xs)>;
using GenerationCallback = std::function<void(const GenerationRecord&)>;

/// Evaluates the initial mean, then runs `iterations` generations and keeps
/// the best-ever sample.
SearchResult maximize(Eigen::VectorXd mean0, const SearchConfig& cfg,
                      const BatchObjective& objective, const GenerationCallback& on_generation = {});

struct CmaesConfig {
  int batch = 100;
  int iterations = 100;
  int elites = 50;
  int evals = 5;
  WeightBounds bounds;
  BoundsMethod method = BoundsMethod::Normalization;
  std::uint64_t seed = 0;
  double sigma0 = 0.0;  // <= 0 selects 0.2 * (ub - lb)
  int threads = 0;
};

inline constexpr std::size_t kMaxDirectDimension = 5000;

/// Mean throughput over `evals` simulations with seeds
/// derive_seed(seed, {generation, candidate, run}).
double evaluate_candidate(const GuidanceGraph& g, const SimConfig& sim, int evals,
                          std::uint64_t seed, std::uint64_t generation, std::uint64_t candidate);

struct GgoResult {
  GuidanceGraph best;
  double best_throughput = 0.0;
  std::vector<GenerationRecord> history;
};

/// Direct guidance-graph optimization: CMA-ES over one raw value per edge,
/// mapped to feasible weights by the configured bounds method. Throws
/// ConfigError when |E_g| exceeds kMaxDirectDimension.
GgoResult optimize_guidance(std::shared_ptr<const EdgeIndexer> indexer, const SimConfig& sim,
                            const CmaesConfig& cfg, const GenerationCallback& on_generation = {});

}  // namespace ggo
