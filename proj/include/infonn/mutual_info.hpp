#pragma once

#include "infonn/core.hpp"

#include <span>

namespace infonn {

/// Which quantity receives the Gaussian perturbation when estimating MI.
enum class MIVariant {
  embedding,  ///< perturb every embedding coordinate, recompute distances
  distances,  ///< perturb the reference-candidate distances directly
};

struct MIConfig {
  MIVariant variant = MIVariant::distances;
  double sigma2 = 1.0;  // variance of the perturbation normal; 0 collapses to one sample
  std::size_t n_samples = 100;
  std::uint64_t seed = 0;
};

void validate_mi_config(const MIConfig& cfg);

/// MI estimate per pool entry, aligned with the pool order.
struct MIScores {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  /// Index of the largest score; ties resolve to the lowest index.
  std::size_t argmax() const;
};

/// Standard-normal noise shared by every query in one scoring pass (common
/// random numbers): column s holds the draws for Monte-Carlo sample s, row c
/// the draw for candidate slot c.
Eigen::MatrixXd standard_normal_block(std::size_t slots, std::size_t n_samples, std::uint64_t seed);

/// Two-term MI estimate for one NN query from explicit standard-normal noise:
/// sample s uses distances base + sigma * noise.col(s) (only the first C rows
/// are read). Samples enter the PL model squared, so their sign is irrelevant.
double nn_mutual_information(std::span<const double> base_distances, const Eigen::MatrixXd& noise, double sigma,
                             double mu);

/// Same estimator with the outcome ranging over all C! orderings, each scored
/// with the sequential PL probability.
double ranking_mutual_information(std::span<const double> base_distances, const Eigen::MatrixXd& noise, double sigma,
                                  double mu);

/// Embedding-perturbation estimator. One perturbed embedding per sample is
/// shared by every query in the pool.
MIScores info_nn_embedding(const Embedding& z, const QueryPool& pool, const MIConfig& cfg, double mu);

/// Distance-perturbation estimator with a noise block shared across queries.
MIScores info_nn_distances(const Embedding& z, const QueryPool& pool, const MIConfig& cfg, double mu);

/// Dispatches on cfg.variant.
MIScores score_pool(const Embedding& z, const QueryPool& pool, const MIConfig& cfg, double mu);

inline constexpr std::size_t kMaxRankingLength = 6;

/// MI of full-ranking responses (C <= 6), distance-perturbation sampling.
MIScores ranking_mi(const Embedding& z, std::span<const RankingQuery> pool, const MIConfig& cfg, double mu);

/// Variance of all pairwise embedding distances; the data-driven sigma^2.
double data_driven_sigma2(const Embedding& z);

}  // namespace infonn
