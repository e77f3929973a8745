#include "infonn/batch.hpp"

#include "infonn/clustering.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace infonn {

void validate_batch_config(const BatchConfig& cfg) {
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (cfg.top_count > cfg.batch_size) throw std::invalid_argument("B' must not exceed B");
}

namespace {

// Indices sorted by score descending; ties keep the lower index first.
std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::vector<std::size_t> select_batch_top_random(const MIScores& scores, const BatchConfig& cfg, Rng& rng) {
  validate_batch_config(cfg);
  if (scores.size() < cfg.batch_size) throw std::invalid_argument("query pool is smaller than the batch size");

  const auto order = rank_by_score(scores.values);
  std::vector<std::size_t> batch(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.top_count));

  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(cfg.top_count), order.end());
  std::sort(rest.begin(), rest.end());
  for (std::size_t i = 0; i < cfg.batch_size - cfg.top_count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rest.size() - 1);
    std::swap(rest[i], rest[pick(rng)]);
    batch.push_back(rest[i]);
  }
  return batch;
}

ClassificationPool build_classification_pool(const Embedding& z, std::span<const LabeledItem> labeled,
                                             std::span<const ItemId> unlabeled, std::size_t max_classes) {
  std::map<int, std::vector<ItemId>> by_class;
  for (const auto& l : labeled) {
    if (l.item.index >= static_cast<std::size_t>(z.rows())) throw std::out_of_range("labeled item out of range");
    by_class[l.label].push_back(l.item);
  }
  const std::size_t reachable = std::min(max_classes, by_class.size());
  if (reachable < 2) throw std::invalid_argument("classification pool needs at least 2 reachable classes");

  ClassificationPool out;
  out.pool.origin = PoolOrigin::classification_built;
  out.pool.queries.reserve(unlabeled.size());
  out.candidate_labels.reserve(unlabeled.size());

  struct Rep {
    double distance;
    int label;
    ItemId item;
  };
  std::vector<Rep> reps;
  for (auto u : unlabeled) {
    if (u.index >= static_cast<std::size_t>(z.rows())) throw std::out_of_range("unlabeled item out of range");
    const auto ur = z.row(static_cast<Eigen::Index>(u.index));
    reps.clear();
    for (const auto& [label, members] : by_class) {
      Rep best{std::numeric_limits<double>::infinity(), label, members.front()};
      for (auto m : members) {
        const double d = (ur - z.row(static_cast<Eigen::Index>(m.index))).norm();
        if (d < best.distance) best = {d, label, m};
      }
      reps.push_back(best);
    }
    // Nearest classes first; equal distances fall back to the smaller label.
    std::stable_sort(reps.begin(), reps.end(), [](const Rep& a, const Rep& b) { return a.distance < b.distance; });
    NNQuery q{u, {}};
    std::vector<int> labels;
    for (std::size_t c = 0; c < reachable; ++c) {
      q.candidates.push_back(reps[c].item);
      labels.push_back(reps[c].label);
    }
    out.pool.queries.push_back(std::move(q));
    out.candidate_labels.push_back(std::move(labels));
  }
  return out;
}

std::vector<std::size_t> round_robin_top(std::span<const double> scores, std::span<const int> groups,
                                         std::size_t batch) {
  if (scores.size() != groups.size()) throw std::invalid_argument("round_robin_top: size mismatch");
  std::map<int, std::vector<std::size_t>> members;
  for (auto i : rank_by_score(scores)) members[groups[i]].push_back(i);
  if (members.empty()) throw std::invalid_argument("grouping produced no nonempty groups");

  std::vector<std::size_t> out;
  for (std::size_t round = 0; out.size() < batch; ++round) {
    std::vector<std::size_t> heads;
    for (const auto& [g, list] : members)
      if (round < list.size()) heads.push_back(list[round]);
    if (heads.empty()) break;
    std::stable_sort(heads.begin(), heads.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    });
    for (auto h : heads) {
      if (out.size() == batch) break;
      out.push_back(h);
    }
  }
  return out;
}

std::vector<ItemId> info_nn_m(const Embedding& z, std::span<const LabeledItem> labeled,
                              std::span<const ItemId> unlabeled, std::size_t batch, std::size_t query_length,
                              const MIConfig& cfg, double mu, const Grouping& grouping) {
  if (unlabeled.size() < batch) throw std::invalid_argument("fewer unlabeled items than the batch size");
  if (batch == 0) return {};

  const auto cls = build_classification_pool(z, labeled, unlabeled, query_length);
  MIConfig dist_cfg = cfg;
  dist_cfg.variant = MIVariant::distances;
  const MIScores scores = info_nn_distances(z, cls.pool, dist_cfg, mu);

  Eigen::MatrixXd urows(static_cast<Eigen::Index>(unlabeled.size()), z.cols());
  for (std::size_t i = 0; i < unlabeled.size(); ++i)
    urows.row(static_cast<Eigen::Index>(i)) = z.row(static_cast<Eigen::Index>(unlabeled[i].index));

  std::vector<int> groups;
  if (const auto* km = std::get_if<KMeansGrouping>(&grouping)) {
    groups = kmeans(urows, std::min(km->k, unlabeled.size()), km->seed).assignment;
  } else {
    const auto& kv = std::get<KnnVoteGrouping>(grouping);
    Eigen::MatrixXd lrows(static_cast<Eigen::Index>(labeled.size()), z.cols());
    std::vector<int> labels;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      lrows.row(static_cast<Eigen::Index>(i)) = z.row(static_cast<Eigen::Index>(labeled[i].item.index));
      labels.push_back(labeled[i].label);
    }
    groups = knn_assign(urows, lrows, labels, std::min(kv.k, labeled.size()));
  }

  std::vector<ItemId> out;
  for (auto i : round_robin_top(scores.values, groups, batch)) out.push_back(unlabeled[i]);
  return out;
}

}  // namespace infonn
