#include "infonn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace infonn {

double triplet_generalization_accuracy(const Embedding& z, std::span<const PairedComparison> test) {
  if (test.empty()) throw std::invalid_argument("TGA: empty test set");
  const auto n = static_cast<std::size_t>(z.rows());
  std::size_t correct = 0;
  for (const auto& t : test) {
    if (std::max({t.reference.index, t.winner.index, t.loser.index}) >= n)
      throw std::out_of_range("TGA: item out of range");
    const auto r = z.row(static_cast<Eigen::Index>(t.reference.index));
    const double dw = (r - z.row(static_cast<Eigen::Index>(t.winner.index))).squaredNorm();
    const double dl = (r - z.row(static_cast<Eigen::Index>(t.loser.index))).squaredNorm();
    correct += dw < dl;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double kendall_tau(std::span<const ItemId> a, std::span<const ItemId> b) {
  const std::size_t m = a.size();
  if (m < 2) throw std::invalid_argument("kendall_tau: need at least 2 items");
  if (b.size() != m) throw std::invalid_argument("kendall_tau: rankings differ in length");
  std::vector<ItemId> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb || std::adjacent_find(sa.begin(), sa.end()) != sa.end())
    throw std::invalid_argument("kendall_tau: rankings cover different item sets");

  std::map<ItemId, std::size_t> pos_b;
  for (std::size_t i = 0; i < m; ++i) pos_b[b[i]] = i;
  std::vector<std::size_t> seq(m);
  for (std::size_t i = 0; i < m; ++i) seq[i] = pos_b.at(a[i]);

  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) (seq[i] < seq[j] ? concordant : discordant) += 1;
  return static_cast<double>(concordant - discordant) / (static_cast<double>(m) * static_cast<double>(m - 1) / 2.0);
}

std::vector<ItemId> distance_ranking(const Embedding& z, ItemId reference) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (reference.index >= n) throw std::out_of_range("distance_ranking: reference out of range");
  const auto r = z.row(static_cast<Eigen::Index>(reference.index));
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (i != reference.index) d.emplace_back((r - z.row(static_cast<Eigen::Index>(i))).squaredNorm(), i);
  std::sort(d.begin(), d.end());
  std::vector<ItemId> out;
  out.reserve(d.size());
  for (const auto& [dist, i] : d) out.emplace_back(i);
  return out;
}

double aggregate_kendall(const Embedding& estimate, const Embedding& truth) {
  if (estimate.rows() != truth.rows()) throw std::invalid_argument("aggregate_kendall: item counts differ");
  if (estimate.rows() < 3) throw std::invalid_argument("aggregate_kendall: need at least 3 items");
  double total = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(truth.rows()); ++i)
    total += kendall_tau(distance_ranking(estimate, ItemId{i}), distance_ranking(truth, ItemId{i}));
  return total / static_cast<double>(truth.rows());
}

std::vector<std::size_t> nearest_neighbors(const Embedding& z, std::size_t item, std::size_t k) {
  const auto ranking = distance_ranking(z, ItemId{item});
  if (k > ranking.size()) throw std::invalid_argument("nearest_neighbors: k too large");
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ranking[i].index);
  return out;
}

double recall_at_k(const Embedding& z, std::span<const int> labels, std::size_t k) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (labels.size() != n) throw std::invalid_argument("recall_at_k: label count mismatch");
  if (k < 1 || k >= n) throw std::invalid_argument("recall_at_k: need 1 <= K < N");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto nn = nearest_neighbors(z, i, k);
    hits += std::any_of(nn.begin(), nn.end(), [&](std::size_t j) { return labels[j] == labels[i]; });
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

double top_fraction_at_k(const Embedding& z, const std::set<std::size_t>& top_set, std::size_t k) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (top_set.empty()) throw std::invalid_argument("top_fraction_at_k: empty top set");
  if (k < 1 || k >= n) throw std::invalid_argument("top_fraction_at_k: need 1 <= K < N");
  double total = 0.0;
  for (auto t : top_set) {
    if (t >= n) throw std::out_of_range("top_fraction_at_k: item out of range");
    const auto nn = nearest_neighbors(z, t, k);
    const auto in_top = std::count_if(nn.begin(), nn.end(), [&](std::size_t j) { return top_set.contains(j); });
    total += static_cast<double>(in_top) / static_cast<double>(k);
  }
  return total / static_cast<double>(top_set.size());
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

TrialStats summarize(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return {quantile(v, 0.5), quantile(v, 0.25), quantile(v, 0.75)};
}

}  // namespace infonn
