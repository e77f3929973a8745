#pragma once

#include "infonn/core.hpp"

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace infonn {

/// Ground-truth geometry an oracle answers from: either an embedding with
/// Euclidean distances, or feature vectors under a Mahalanobis metric M
/// (d(x, y)^2 = (x - y)^T M (x - y)).
class GroundTruth {
 public:
  static GroundTruth from_embedding(Embedding truth);
  /// Throws if `metric` is not square, symmetric, or PSD (smallest eigenvalue >= -1e-8).
  static GroundTruth mahalanobis(Eigen::MatrixXd features, Eigen::MatrixXd metric);

  std::size_t n_items() const { return static_cast<std::size_t>(points_.rows()); }
  double distance(ItemId a, ItemId b) const;
  Eigen::VectorXd distances(ItemId reference, std::span<const ItemId> candidates) const;

  const Eigen::MatrixXd& points() const { return points_; }
  const std::optional<Eigen::MatrixXd>& metric() const { return metric_; }

 private:
  GroundTruth(Eigen::MatrixXd points, std::optional<Eigen::MatrixXd> metric)
      : points_(std::move(points)), metric_(std::move(metric)) {}

  Eigen::MatrixXd points_;
  std::optional<Eigen::MatrixXd> metric_;
};

/// Answer source for NN and ranking queries.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual QueryResponse answer_nn(const NNQuery& q, Rng& rng) = 0;
  virtual RankingResponse answer_ranking(const RankingQuery& q, Rng& rng);
};

/// Winner = nearest candidate by true distance; ties go to the lowest position.
class DeterministicOracle : public Oracle {
 public:
  explicit DeterministicOracle(GroundTruth truth) : truth_(std::move(truth)) {}
  QueryResponse answer_nn(const NNQuery& q, Rng& rng) override;
  RankingResponse answer_ranking(const RankingQuery& q, Rng& rng) override;
  const GroundTruth& truth() const { return truth_; }

 private:
  GroundTruth truth_;
};

/// Winner sampled from the PL choice probabilities of the true distances;
/// rankings sampled sequentially without replacement.
class PLNoisyOracle : public Oracle {
 public:
  PLNoisyOracle(GroundTruth truth, double mu);
  QueryResponse answer_nn(const NNQuery& q, Rng& rng) override;
  RankingResponse answer_ranking(const RankingQuery& q, Rng& rng) override;

 private:
  GroundTruth truth_;
  double mu_;
};

/// Wraps another oracle; with probability `rate` the inner winner is replaced
/// by a uniform draw among the other C-1 candidates. Corruption decisions use a
/// private stream so rate 0 reproduces the inner oracle exactly.
class CorruptedOracle : public Oracle {
 public:
  CorruptedOracle(std::unique_ptr<Oracle> inner, double rate, std::uint64_t seed);
  QueryResponse answer_nn(const NNQuery& q, Rng& rng) override;

  std::size_t answered() const { return answered_; }
  std::size_t corrupted() const { return corrupted_; }

 private:
  std::unique_ptr<Oracle> inner_;
  double rate_;
  Rng stream_;
  std::size_t answered_ = 0;
  std::size_t corrupted_ = 0;
};

/// Thrown when an oracle cannot answer: missing replay entry, closed human session.
class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Answers from a stored corpus, matching on (reference, candidate set) with
/// candidate order ignored. Repeated stored answers for the same key are
/// replayed in file order, cycling.
class ReplayOracle : public Oracle {
 public:
  explicit ReplayOracle(std::span<const QueryResponse> corpus);
  explicit ReplayOracle(std::span<const PairedComparison> triplets);

  QueryResponse answer_nn(const NNQuery& q, Rng& rng) override;
  bool covers(const NNQuery& q) const;

 private:
  struct Entry {
    std::vector<ItemId> winners;
    std::size_t cursor = 0;
  };
  using Key = std::pair<ItemId, std::vector<ItemId>>;
  static Key key_of(const NNQuery& q);
  void add(const NNQuery& q, ItemId winner);

  std::map<Key, Entry> entries_;
};

/// Bridge to a live human: answer_nn publishes the query and blocks until
/// provide() delivers a winner or close() is called. One outstanding query.
class HumanBridgeOracle : public Oracle {
 public:
  QueryResponse answer_nn(const NNQuery& q, Rng& rng) override;

  /// Query waiting for an answer, if any.
  std::optional<NNQuery> pending() const;
  /// Delivers the 1-based winner for the pending query. Throws if none is
  /// pending or the index is out of range.
  void provide(std::size_t winner);
  void close();

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<NNQuery> pending_;
  std::optional<std::size_t> answer_;
  bool closed_ = false;
};

}  // namespace infonn
