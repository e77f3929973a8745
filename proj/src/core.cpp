#include "infonn/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace infonn {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void validate_query(const NNQuery& q) {
  if (q.candidates.size() < 2) throw std::invalid_argument("NN query needs at least 2 candidates");
  std::vector<ItemId> sorted = q.candidates;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("NN query candidates must be distinct");
  if (std::binary_search(sorted.begin(), sorted.end(), q.reference))
    throw std::invalid_argument("NN query reference must not be a candidate");
}

void validate_query(const NNQuery& q, std::size_t n_items) {
  validate_query(q);
  if (q.reference.index >= n_items) throw std::out_of_range("reference id out of range");
  for (auto c : q.candidates)
    if (c.index >= n_items) throw std::out_of_range("candidate id out of range");
}

void validate_response(const QueryResponse& r) {
  validate_query(r.query);
  if (r.winner < 1 || r.winner > r.query.length())
    throw std::invalid_argument("winner index must be in 1..C, got " + std::to_string(r.winner));
}

void validate_response(const RankingResponse& r) {
  validate_query(NNQuery{r.query.reference, r.query.candidates});
  const std::size_t c = r.query.length();
  if (r.order.size() != c) throw std::invalid_argument("ranking response has wrong length");
  std::vector<bool> seen(c, false);
  for (auto pos : r.order) {
    if (pos < 1 || pos > c || seen[pos - 1]) throw std::invalid_argument("ranking response is not a permutation");
    seen[pos - 1] = true;
  }
}

void validate_embedding(const Embedding& z) {
  if (z.rows() < 2) throw std::invalid_argument("embedding needs at least 2 items");
  if (z.cols() < 1) throw std::invalid_argument("embedding needs at least 1 dimension");
  if (!z.allFinite()) throw std::invalid_argument("embedding has non-finite entries");
}

std::vector<PairedComparison> decompose_nn(const QueryResponse& response) {
  validate_response(response);
  const auto& q = response.query;
  const ItemId winner = response.winner_item();
  std::vector<PairedComparison> out;
  out.reserve(q.length() - 1);
  for (std::size_t c = 0; c < q.length(); ++c) {
    if (c + 1 == response.winner) continue;
    out.push_back({q.reference, winner, q.candidates[c]});
  }
  return out;
}

std::vector<PairedComparison> decompose_ranking(const RankingResponse& response) {
  validate_response(response);
  const auto& q = response.query;
  std::vector<PairedComparison> out;
  out.reserve(q.length() * (q.length() - 1) / 2);
  for (std::size_t i = 0; i < response.order.size(); ++i)
    for (std::size_t j = i + 1; j < response.order.size(); ++j)
      out.push_back({q.reference, q.candidates[response.order[i] - 1], q.candidates[response.order[j] - 1]});
  return out;
}

DistanceStats distance_stats(const Embedding& z) {
  DistanceStats s;
  const Eigen::Index n = z.rows();
  if (n < 2) return s;
  // Welford over the upper triangle.
  double mean = 0.0, m2 = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (z.row(i) - z.row(j)).norm();
      s.max = std::max(s.max, d);
      ++count;
      const double delta = d - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (d - mean);
    }
  }
  s.mean = mean;
  s.variance = m2 / static_cast<double>(count);
  return s;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    // result * num / i is exact at each step; guard the multiplication.
    if (result > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    result = result * num / i;
  }
  return result;
}

namespace {

std::vector<ItemId> others(std::size_t n_items, ItemId reference) {
  std::vector<ItemId> out;
  out.reserve(n_items - 1);
  for (std::size_t i = 0; i < n_items; ++i)
    if (i != reference.index) out.emplace_back(i);
  return out;
}

// Calls `visit` with each k-combination of [0, n) in lexicographic order.
template <typename F>
void for_each_combination(std::size_t n, std::size_t k, F&& visit) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<std::size_t> random_subset(std::size_t n, std::size_t k, Rng& rng) {
  // Partial Fisher-Yates.
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

QueryPool enumerate_candidate_queries(std::size_t n_items, std::size_t length, ItemId reference,
                                      std::optional<std::size_t> cap, Rng& rng) {
  if (length < 2) throw std::invalid_argument("query length must be at least 2");
  if (n_items < 1 || length > n_items - 1)
    throw std::invalid_argument("query length " + std::to_string(length) + " exceeds N-1 = " +
                                std::to_string(n_items == 0 ? 0 : n_items - 1));
  if (reference.index >= n_items) throw std::out_of_range("reference out of range");
  if (cap && *cap == 0) throw std::invalid_argument("candidate cap must be positive");

  const auto pool_items = others(n_items, reference);
  const std::size_t total = binomial(n_items - 1, length);
  QueryPool pool;

  auto make_query = [&](const std::vector<std::size_t>& idx) {
    NNQuery q{reference, {}};
    q.candidates.reserve(idx.size());
    for (auto i : idx) q.candidates.push_back(pool_items[i]);
    return q;
  };

  if (!cap || total <= *cap) {
    pool.origin = PoolOrigin::enumerated;
    pool.queries.reserve(total);
    for_each_combination(n_items - 1, length, [&](const auto& idx) { pool.queries.push_back(make_query(idx)); });
    return pool;
  }

  pool.origin = PoolOrigin::subsampled;
  // Rejection on duplicates; fine because cap < total. When the sample would
  // cover most of the space, fall back to enumerating and keeping a random subset.
  if (*cap * 2 > total) {
    std::vector<std::vector<std::size_t>> all;
    all.reserve(total);
    for_each_combination(n_items - 1, length, [&](const auto& idx) { all.push_back(idx); });
    const auto keep = random_subset(total, *cap, rng);
    for (auto k : keep) pool.queries.push_back(make_query(all[k]));
    return pool;
  }
  std::set<std::vector<std::size_t>> seen;
  while (seen.size() < *cap) {
    auto idx = random_subset(n_items - 1, length, rng);
    if (seen.insert(idx).second) pool.queries.push_back(make_query(idx));
  }
  return pool;
}

NNQuery random_query(std::size_t n_items, std::size_t length, Rng& rng) {
  if (length < 2 || n_items < length + 1) throw std::invalid_argument("random_query: need N >= C+1 and C >= 2");
  std::uniform_int_distribution<std::size_t> pick_ref(0, n_items - 1);
  const ItemId reference{pick_ref(rng)};
  const auto pool_items = others(n_items, reference);
  NNQuery q{reference, {}};
  for (auto i : random_subset(n_items - 1, length, rng)) q.candidates.push_back(pool_items[i]);
  return q;
}

}  // namespace infonn
