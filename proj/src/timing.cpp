#include "infonn/timing.hpp"

#include "infonn/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace infonn {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

template <typename F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<TimingRow> timing_bench(const TimingConfig& cfg, std::uint64_t seed) {
  validate_mi_config(cfg.mi);
  if (cfg.repetitions < 1) throw std::invalid_argument("timing bench needs at least one repetition");
  std::vector<TimingRow> rows;
  for (auto k : cfg.lengths) {
    if (k < 2 || k > 5) throw std::invalid_argument("timing bench query lengths must lie in 2..5");
    if (cfg.n_items < k + 1) throw std::invalid_argument("timing bench needs more items than the query length");
    TimingRow row;
    row.length = k;
    std::vector<double> nn_times, rank_times;
    {
      // Untimed warm-up so the first repetition does not pay for cold caches.
      Rng rng(derive_seed(seed, cfg.repetitions));
      const Embedding z = standard_normal_matrix(cfg.n_items, cfg.dim, rng);
      const QueryPool pool = enumerate_candidate_queries(cfg.n_items, k, ItemId{0}, cfg.candidate_cap, rng);
      std::vector<RankingQuery> ranking;
      for (const auto& q : pool.queries) ranking.push_back({q.reference, q.candidates});
      score_pool(z, pool, cfg.mi, cfg.mu);
      ranking_mi(z, ranking, cfg.mi, cfg.mu);
    }
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      Rng rng(derive_seed(seed, rep));
      const Embedding z = standard_normal_matrix(cfg.n_items, cfg.dim, rng);
      const ItemId ref{rep % cfg.n_items};
      const QueryPool pool = enumerate_candidate_queries(cfg.n_items, k, ref, cfg.candidate_cap, rng);
      std::vector<RankingQuery> ranking;
      ranking.reserve(pool.size());
      for (const auto& q : pool.queries) ranking.push_back({q.reference, q.candidates});

      MIConfig mi = cfg.mi;
      mi.seed = derive_seed(seed, 1000 + rep);
      MIScores nn, rk;
      nn_times.push_back(timed([&] { nn = score_pool(z, pool, mi, cfg.mu); }));
      rank_times.push_back(timed([&] { rk = ranking_mi(z, ranking, mi, cfg.mu); }));
      row.nn_checksum += std::accumulate(nn.values.begin(), nn.values.end(), 0.0);
      row.rank_checksum += std::accumulate(rk.values.begin(), rk.values.end(), 0.0);
    }
    const auto nn = mean_std(nn_times);
    const auto rk = mean_std(rank_times);
    row.nn_mean = nn.mean;
    row.nn_std = nn.std;
    row.rank_mean = rk.mean;
    row.rank_std = rk.std;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace infonn
