#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace infonn {

/// Dense embedding type: one row per item, one column per embedding dimension.
template <typename Scalar>
using EmbeddingT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Embedding = EmbeddingT<double>;

/// Random engine used everywhere in the library. Seeded explicitly; never from
/// the wall clock.
using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// 0-based index of an item in the dataset.
struct ItemId {
  std::size_t index = 0;

  constexpr ItemId() = default;
  constexpr explicit ItemId(std::size_t i) : index(i) {}
  constexpr auto operator<=>(const ItemId&) const = default;
};

/// A reference item and an ordered list of candidates. The oracle names the
/// candidate most similar to the reference.
struct NNQuery {
  ItemId reference;
  std::vector<ItemId> candidates;

  std::size_t length() const { return candidates.size(); }
  bool operator==(const NNQuery&) const = default;
};

/// Answer to an NN query. `winner` is the 1-based position within
/// `query.candidates`.
struct QueryResponse {
  NNQuery query;
  std::size_t winner = 1;

  ItemId winner_item() const { return query.candidates.at(winner - 1); }
};

/// Same shape as NNQuery, but the answer is a full ordering of the candidates.
struct RankingQuery {
  ItemId reference;
  std::vector<ItemId> candidates;

  std::size_t length() const { return candidates.size(); }
};

/// `order[k]` is the 1-based candidate position ranked k-th (most similar first).
struct RankingResponse {
  RankingQuery query;
  std::vector<std::size_t> order;
};

/// "reference is closer to winner than to loser".
struct PairedComparison {
  ItemId reference;
  ItemId winner;
  ItemId loser;

  bool operator==(const PairedComparison&) const = default;
};

enum class PoolOrigin { enumerated, subsampled, classification_built, ingested };

struct QueryPool {
  std::vector<NNQuery> queries;
  PoolOrigin origin = PoolOrigin::enumerated;

  std::size_t size() const { return queries.size(); }
  bool empty() const { return queries.empty(); }
};

/// Throws std::invalid_argument unless the query has >= 2 distinct candidates
/// and the reference is not among them.
void validate_query(const NNQuery& q);
void validate_query(const NNQuery& q, std::size_t n_items);
void validate_response(const QueryResponse& r);
void validate_response(const RankingResponse& r);
void validate_embedding(const Embedding& z);

/// C-1 comparisons (reference, winner, other) in candidate order.
std::vector<PairedComparison> decompose_nn(const QueryResponse& response);

/// C(C-1)/2 comparisons: every earlier-ranked candidate beats every later one.
std::vector<PairedComparison> decompose_ranking(const RankingResponse& response);

/// Euclidean distance from the reference row to each candidate row.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> query_distances(
    const Eigen::MatrixBase<Derived>& z, ItemId reference, std::span<const ItemId> candidates) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (reference.index >= n) throw std::out_of_range("query_distances: reference out of range");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> d(static_cast<Eigen::Index>(candidates.size()));
  const auto r = static_cast<Eigen::Index>(reference.index);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (candidates[c].index >= n) throw std::out_of_range("query_distances: candidate out of range");
    d(static_cast<Eigen::Index>(c)) = (z.row(r) - z.row(static_cast<Eigen::Index>(candidates[c].index))).norm();
  }
  return d;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> query_distances(
    const Eigen::MatrixBase<Derived>& z, const NNQuery& q) {
  return query_distances(z, q.reference, std::span<const ItemId>(q.candidates));
}

/// N x N matrix of Euclidean distances between rows.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pairwise_distances(
    const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = z.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = Scalar(0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (z.row(i) - z.row(j)).norm();
    }
  }
  return d;
}

/// Summary of the off-diagonal pairwise distances (i < j).
struct DistanceStats {
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // population variance
};
DistanceStats distance_stats(const Embedding& z);

/// Number of k-subsets of n items, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

/// Every length-`length` candidate set for `reference` (candidates ascending,
/// sets in lexicographic order) when that count is within `cap`; otherwise a
/// uniform sample of `cap` distinct sets drawn without replacement.
QueryPool enumerate_candidate_queries(std::size_t n_items, std::size_t length, ItemId reference,
                                      std::optional<std::size_t> cap, Rng& rng);

/// Uniformly random reference, then `length` distinct candidates uniformly
/// from the remaining items (candidates ascending).
NNQuery random_query(std::size_t n_items, std::size_t length, Rng& rng);

}  // namespace infonn
