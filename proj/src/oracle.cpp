#include "infonn/oracle.hpp"

#include "infonn/plmodel.hpp"

#include <algorithm>
#include <numeric>

namespace infonn {

GroundTruth GroundTruth::from_embedding(Embedding truth) {
  validate_embedding(truth);
  return GroundTruth(std::move(truth), std::nullopt);
}

GroundTruth GroundTruth::mahalanobis(Eigen::MatrixXd features, Eigen::MatrixXd metric) {
  validate_embedding(features);
  if (metric.rows() != metric.cols() || metric.rows() != features.cols())
    throw std::invalid_argument("Mahalanobis metric must be D x D");
  if (!metric.isApprox(metric.transpose(), 1e-12)) throw std::invalid_argument("Mahalanobis metric must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(metric, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("Mahalanobis metric must be PSD");
  return GroundTruth(std::move(features), std::move(metric));
}

double GroundTruth::distance(ItemId a, ItemId b) const {
  if (a.index >= n_items() || b.index >= n_items()) throw std::out_of_range("ground truth: item out of range");
  const Eigen::VectorXd diff =
      (points_.row(static_cast<Eigen::Index>(a.index)) - points_.row(static_cast<Eigen::Index>(b.index))).transpose();
  if (!metric_) return diff.norm();
  return std::sqrt(std::max(0.0, diff.dot(*metric_ * diff)));
}

Eigen::VectorXd GroundTruth::distances(ItemId reference, std::span<const ItemId> candidates) const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c) d(static_cast<Eigen::Index>(c)) = distance(reference, candidates[c]);
  return d;
}

namespace {

std::vector<std::size_t> stable_order_by_distance(const Eigen::VectorXd& d) {
  std::vector<std::size_t> order(static_cast<std::size_t>(d.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d(static_cast<Eigen::Index>(a)) < d(static_cast<Eigen::Index>(b));
  });
  for (auto& o : order) ++o;
  return order;
}

std::size_t sample_categorical(const Eigen::VectorXd& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng) * p.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (x < acc) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(p.size() - 1);
}

}  // namespace

RankingResponse Oracle::answer_ranking(const RankingQuery&, Rng&) {
  throw std::logic_error("this oracle does not answer ranking queries");
}

QueryResponse DeterministicOracle::answer_nn(const NNQuery& q, Rng&) {
  validate_query(q, truth_.n_items());
  const Eigen::VectorXd d = truth_.distances(q.reference, q.candidates);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < d.size(); ++i)
    if (d(i) < d(best)) best = i;
  return {q, static_cast<std::size_t>(best) + 1};
}

RankingResponse DeterministicOracle::answer_ranking(const RankingQuery& q, Rng&) {
  validate_query(NNQuery{q.reference, q.candidates}, truth_.n_items());
  return {q, stable_order_by_distance(truth_.distances(q.reference, q.candidates))};
}

PLNoisyOracle::PLNoisyOracle(GroundTruth truth, double mu) : truth_(std::move(truth)), mu_(mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("PL oracle mu must be nonnegative");
}

QueryResponse PLNoisyOracle::answer_nn(const NNQuery& q, Rng& rng) {
  validate_query(q, truth_.n_items());
  const Eigen::VectorXd p = choice_probabilities(truth_.distances(q.reference, q.candidates), mu_);
  return {q, sample_categorical(p, rng) + 1};
}

RankingResponse PLNoisyOracle::answer_ranking(const RankingQuery& q, Rng& rng) {
  validate_query(NNQuery{q.reference, q.candidates}, truth_.n_items());
  Eigen::VectorXd d = truth_.distances(q.reference, q.candidates);
  std::vector<std::size_t> remaining(q.candidates.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  RankingResponse out{q, {}};
  while (remaining.size() > 1) {
    Eigen::VectorXd sub(static_cast<Eigen::Index>(remaining.size()));
    for (std::size_t i = 0; i < remaining.size(); ++i) sub(static_cast<Eigen::Index>(i)) = d(static_cast<Eigen::Index>(remaining[i]));
    const auto pick = sample_categorical(choice_probabilities(sub, mu_), rng);
    out.order.push_back(remaining[pick] + 1);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  out.order.push_back(remaining.front() + 1);
  return out;
}

CorruptedOracle::CorruptedOracle(std::unique_ptr<Oracle> inner, double rate, std::uint64_t seed)
    : inner_(std::move(inner)), rate_(rate), stream_(seed) {
  if (!inner_) throw std::invalid_argument("corrupted oracle needs an inner oracle");
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("corruption rate must lie in [0,1]");
}

QueryResponse CorruptedOracle::answer_nn(const NNQuery& q, Rng& rng) {
  QueryResponse r = inner_->answer_nn(q, rng);
  ++answered_;
  std::bernoulli_distribution flip(rate_);
  if (!flip(stream_)) return r;
  std::uniform_int_distribution<std::size_t> other(1, q.length() - 1);
  std::size_t w = other(stream_);
  if (w >= r.winner) ++w;
  r.winner = w;
  ++corrupted_;
  return r;
}

ReplayOracle::Key ReplayOracle::key_of(const NNQuery& q) {
  std::vector<ItemId> c = q.candidates;
  std::sort(c.begin(), c.end());
  return {q.reference, std::move(c)};
}

void ReplayOracle::add(const NNQuery& q, ItemId winner) { entries_[key_of(q)].winners.push_back(winner); }

ReplayOracle::ReplayOracle(std::span<const QueryResponse> corpus) {
  for (const auto& r : corpus) {
    validate_response(r);
    add(r.query, r.winner_item());
  }
}

ReplayOracle::ReplayOracle(std::span<const PairedComparison> triplets) {
  for (const auto& t : triplets) {
    const NNQuery q{t.reference, {t.winner, t.loser}};
    validate_query(q);
    add(q, t.winner);
  }
}

bool ReplayOracle::covers(const NNQuery& q) const { return entries_.contains(key_of(q)); }

QueryResponse ReplayOracle::answer_nn(const NNQuery& q, Rng&) {
  auto it = entries_.find(key_of(q));
  if (it == entries_.end()) throw OracleUnavailable("replay corpus has no answer for this query");
  Entry& e = it->second;
  const ItemId w = e.winners[e.cursor];
  e.cursor = (e.cursor + 1) % e.winners.size();
  const auto pos = std::find(q.candidates.begin(), q.candidates.end(), w);
  return {q, static_cast<std::size_t>(pos - q.candidates.begin()) + 1};
}

QueryResponse HumanBridgeOracle::answer_nn(const NNQuery& q, Rng&) {
  validate_query(q);
  std::unique_lock lock(mutex_);
  if (closed_) throw OracleUnavailable("human session closed");
  if (pending_) throw std::logic_error("human oracle already has an outstanding query");
  pending_ = q;
  answer_.reset();
  cv_.wait(lock, [&] { return closed_ || answer_.has_value(); });
  if (!answer_) {
    pending_.reset();
    throw OracleUnavailable("human session closed");
  }
  QueryResponse r{*pending_, *answer_};
  pending_.reset();
  answer_.reset();
  return r;
}

std::optional<NNQuery> HumanBridgeOracle::pending() const {
  std::lock_guard lock(mutex_);
  return pending_;
}

void HumanBridgeOracle::provide(std::size_t winner) {
  {
    std::lock_guard lock(mutex_);
    if (!pending_ || answer_) throw std::logic_error("no pending query to answer");
    if (winner < 1 || winner > pending_->length()) throw std::invalid_argument("winner index out of range");
    answer_ = winner;
  }
  cv_.notify_all();
}

void HumanBridgeOracle::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

}  // namespace infonn
