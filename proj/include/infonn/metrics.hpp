#pragma once

#include "infonn/core.hpp"

#include <set>

namespace infonn {

/// Fraction of comparisons whose ordering the embedding reproduces
/// (d(r, winner) < d(r, loser) strictly; ties count as wrong).
double triplet_generalization_accuracy(const Embedding& z, std::span<const PairedComparison> test);

/// Tau-a between two orderings of the same item set.
double kendall_tau(std::span<const ItemId> a, std::span<const ItemId> b);

/// All other items ordered by distance to `reference`; ties broken by index.
std::vector<ItemId> distance_ranking(const Embedding& z, ItemId reference);

/// Mean over references of tau between the distance rankings in the two embeddings.
double aggregate_kendall(const Embedding& estimate, const Embedding& truth);

/// Indices of the k nearest other rows (ascending distance, ties by index).
std::vector<std::size_t> nearest_neighbors(const Embedding& z, std::size_t item, std::size_t k);

/// Fraction of items with at least one same-class item among their K nearest
/// neighbors (self excluded).
double recall_at_k(const Embedding& z, std::span<const int> labels, std::size_t k);

/// Mean over t in top_set of |kNN(t) ∩ top_set| / K (self excluded).
double top_fraction_at_k(const Embedding& z, const std::set<std::size_t>& top_set, std::size_t k);

struct TrialStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Quantiles with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
TrialStats summarize(std::span<const double> values);

}  // namespace infonn
