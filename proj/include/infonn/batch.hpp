#pragma once

#include "infonn/mutual_info.hpp"

#include <variant>

namespace infonn {

struct BatchConfig {
  std::size_t batch_size = 10;  // B
  std::size_t top_count = 10;   // B', number of highest-MI picks; the rest is random fill
};

void validate_batch_config(const BatchConfig& cfg);

/// Pool indices of the B' highest-MI queries (ties to the lower index),
/// followed by B - B' uniform draws without replacement from the remainder.
std::vector<std::size_t> select_batch_top_random(const MIScores& scores, const BatchConfig& cfg, Rng& rng);

struct LabeledItem {
  ItemId item;
  int label = 0;
};

/// Classification reformulated as NN queries: one query per unlabeled item,
/// whose candidates are the nearest labeled representative of each of the
/// `max_classes` classes closest to it, nearest class first.
struct ClassificationPool {
  QueryPool pool;
  std::vector<std::vector<int>> candidate_labels;  // class of each candidate, per query
};

ClassificationPool build_classification_pool(const Embedding& z, std::span<const LabeledItem> labeled,
                                             std::span<const ItemId> unlabeled, std::size_t max_classes);

struct KMeansGrouping {
  std::size_t k = 4;
  std::uint64_t seed = 0;
};
struct KnnVoteGrouping {
  std::size_t k = 5;
};
using Grouping = std::variant<KMeansGrouping, KnnVoteGrouping>;

/// Batch acquisition for classification: score the classification pool with
/// the distance-perturbation estimator, group the unlabeled items, and take
/// the best-scoring remaining item of every group round by round (within a
/// round, higher MI first) until `batch` items are chosen.
std::vector<ItemId> info_nn_m(const Embedding& z, std::span<const LabeledItem> labeled,
                              std::span<const ItemId> unlabeled, std::size_t batch, std::size_t query_length,
                              const MIConfig& cfg, double mu, const Grouping& grouping);

/// Round-robin over groups; exposed for testing. `scores[i]` and `groups[i]`
/// describe candidate i; returns candidate indices.
std::vector<std::size_t> round_robin_top(std::span<const double> scores, std::span<const int> groups,
                                         std::size_t batch);

}  // namespace infonn
