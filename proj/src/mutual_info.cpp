#include "infonn/mutual_info.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace infonn {

void validate_mi_config(const MIConfig& cfg) {
  if (!(cfg.sigma2 >= 0.0) || !std::isfinite(cfg.sigma2)) throw std::invalid_argument("sigma2 must be finite and >= 0");
  if (cfg.n_samples < 1) throw std::invalid_argument("n_samples must be at least 1");
}

std::size_t MIScores::argmax() const {
  if (values.empty()) throw std::invalid_argument("argmax of empty scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

Eigen::MatrixXd standard_normal_block(std::size_t slots, std::size_t n_samples, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd noise(static_cast<Eigen::Index>(slots), static_cast<Eigen::Index>(n_samples));
  for (Eigen::Index s = 0; s < noise.cols(); ++s)
    for (Eigen::Index c = 0; c < noise.rows(); ++c) noise(c, s) = normal(rng);
  return noise;
}

namespace {

double entropy_of(const double* p, std::size_t n) {
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

// PL probabilities from squared distances into `p`; zero-distance limit when mu == 0.
void pl_from_squared(const double* sq, std::size_t c, double mu, double* p) {
  if (mu == 0.0) {
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < c; ++i) zeros += sq[i] == 0.0;
    if (zeros > 0) {
      for (std::size_t i = 0; i < c; ++i) p[i] = sq[i] == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
      return;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    p[i] = 1.0 / (sq[i] + mu);
    total += p[i];
  }
  const double inv = 1.0 / total;
  for (std::size_t i = 0; i < c; ++i) p[i] *= inv;
}

// Accumulates mean predictive distribution and mean entropy over samples.
class TwoTermAccumulator {
 public:
  explicit TwoTermAccumulator(std::size_t outcomes) : pbar_(outcomes, 0.0) {}

  void add(const double* p) {
    for (std::size_t i = 0; i < pbar_.size(); ++i) pbar_[i] += p[i];
    hbar_ += entropy_of(p, pbar_.size());
    ++n_;
  }

  double mutual_information() {
    const double inv = 1.0 / static_cast<double>(n_);
    for (auto& v : pbar_) v *= inv;
    return entropy_of(pbar_.data(), pbar_.size()) - hbar_ * inv;
  }

 private:
  std::vector<double> pbar_;
  double hbar_ = 0.0;
  std::size_t n_ = 0;
};

std::size_t effective_samples(const Eigen::MatrixXd& noise, double sigma) {
  // With no perturbation every sample is identical; one suffices and keeps the
  // estimate exactly zero.
  return sigma == 0.0 ? std::min<std::size_t>(1, static_cast<std::size_t>(noise.cols()))
                      : static_cast<std::size_t>(noise.cols());
}

void check_noise(std::span<const double> base, const Eigen::MatrixXd& noise) {
  if (base.size() < 2) throw std::invalid_argument("query needs at least 2 candidates");
  if (static_cast<std::size_t>(noise.rows()) < base.size()) throw std::invalid_argument("noise block has too few slots");
  if (noise.cols() < 1) throw std::invalid_argument("noise block has no samples");
}

std::vector<std::vector<std::size_t>> all_permutations(std::size_t c) {
  std::vector<std::size_t> perm(c);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::size_t max_length(const QueryPool& pool) {
  std::size_t c = 0;
  for (const auto& q : pool.queries) c = std::max(c, q.length());
  return c;
}

}  // namespace

double nn_mutual_information(std::span<const double> base, const Eigen::MatrixXd& noise, double sigma, double mu) {
  check_noise(base, noise);
  const std::size_t c = base.size();
  const std::size_t n = effective_samples(noise, sigma);
  std::vector<double> sq(c), p(c);
  TwoTermAccumulator acc(c);
  for (std::size_t s = 0; s < n; ++s) {
    const double* eps = noise.col(static_cast<Eigen::Index>(s)).data();
    for (std::size_t i = 0; i < c; ++i) {
      const double d = base[i] + sigma * eps[i];
      sq[i] = d * d;
    }
    pl_from_squared(sq.data(), c, mu, p.data());
    acc.add(p.data());
  }
  return acc.mutual_information();
}

double ranking_mutual_information(std::span<const double> base, const Eigen::MatrixXd& noise, double sigma, double mu) {
  check_noise(base, noise);
  const std::size_t c = base.size();
  if (c > kMaxRankingLength)
    throw std::invalid_argument("ranking MI supports at most " + std::to_string(kMaxRankingLength) + " candidates");
  const auto perms = all_permutations(c);
  const std::size_t n = effective_samples(noise, sigma);
  std::vector<double> sq(c), u(c), p(perms.size());
  TwoTermAccumulator acc(perms.size());
  for (std::size_t s = 0; s < n; ++s) {
    const double* eps = noise.col(static_cast<Eigen::Index>(s)).data();
    for (std::size_t i = 0; i < c; ++i) {
      const double d = base[i] + sigma * eps[i];
      sq[i] = d * d;
    }
    // Utilities are only defined up to scale; normalized PL probabilities
    // give the same sequential-choice product.
    pl_from_squared(sq.data(), c, mu, u.data());
    for (std::size_t k = 0; k < perms.size(); ++k) {
      double remaining = 1.0;
      double prob = 1.0;
      for (std::size_t pos = 0; pos + 1 < c; ++pos) {
        const double w = u[perms[k][pos]];
        prob *= remaining > 0.0 ? w / remaining : 0.0;
        remaining -= w;
      }
      p[k] = prob;
    }
    acc.add(p.data());
  }
  return acc.mutual_information();
}

MIScores info_nn_distances(const Embedding& z, const QueryPool& pool, const MIConfig& cfg, double mu) {
  validate_mi_config(cfg);
  if (pool.empty()) throw std::invalid_argument("info_nn_distances: empty query pool");
  const Eigen::MatrixXd noise = standard_normal_block(max_length(pool), cfg.n_samples, cfg.seed);
  const double sigma = std::sqrt(cfg.sigma2);
  MIScores out;
  out.values.reserve(pool.size());
  for (const auto& q : pool.queries) {
    const Eigen::VectorXd d = query_distances(z, q);
    out.values.push_back(nn_mutual_information({d.data(), static_cast<std::size_t>(d.size())}, noise, sigma, mu));
  }
  return out;
}

MIScores info_nn_embedding(const Embedding& z, const QueryPool& pool, const MIConfig& cfg, double mu) {
  validate_mi_config(cfg);
  if (pool.empty()) throw std::invalid_argument("info_nn_embedding: empty query pool");
  for (const auto& q : pool.queries) validate_query(q, static_cast<std::size_t>(z.rows()));

  const double sigma = std::sqrt(cfg.sigma2);
  const std::size_t n = sigma == 0.0 ? 1 : cfg.n_samples;
  const std::size_t c_max = max_length(pool);

  std::vector<TwoTermAccumulator> acc;
  acc.reserve(pool.size());
  for (const auto& q : pool.queries) acc.emplace_back(q.length());

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Embedding perturbed(z.rows(), z.cols());
  std::vector<double> sq(c_max), p(c_max);
  for (std::size_t s = 0; s < n; ++s) {
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      for (Eigen::Index i = 0; i < z.rows(); ++i) perturbed(i, j) = z(i, j) + sigma * normal(rng);
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const NNQuery& q = pool.queries[k];
      const auto r = static_cast<Eigen::Index>(q.reference.index);
      for (std::size_t c = 0; c < q.length(); ++c)
        sq[c] = (perturbed.row(r) - perturbed.row(static_cast<Eigen::Index>(q.candidates[c].index))).squaredNorm();
      pl_from_squared(sq.data(), q.length(), mu, p.data());
      acc[k].add(p.data());
    }
  }

  MIScores out;
  out.values.reserve(pool.size());
  for (auto& a : acc) out.values.push_back(a.mutual_information());
  return out;
}

MIScores score_pool(const Embedding& z, const QueryPool& pool, const MIConfig& cfg, double mu) {
  return cfg.variant == MIVariant::embedding ? info_nn_embedding(z, pool, cfg, mu) : info_nn_distances(z, pool, cfg, mu);
}

MIScores ranking_mi(const Embedding& z, std::span<const RankingQuery> pool, const MIConfig& cfg, double mu) {
  validate_mi_config(cfg);
  if (pool.empty()) throw std::invalid_argument("ranking_mi: empty query pool");
  std::size_t c_max = 0;
  for (const auto& q : pool) c_max = std::max(c_max, q.length());
  if (c_max > kMaxRankingLength) throw std::invalid_argument("ranking MI: query length too large");
  const Eigen::MatrixXd noise = standard_normal_block(c_max, cfg.n_samples, cfg.seed);
  const double sigma = std::sqrt(cfg.sigma2);
  MIScores out;
  out.values.reserve(pool.size());
  for (const auto& q : pool) {
    const Eigen::VectorXd d = query_distances(z, q.reference, std::span<const ItemId>(q.candidates));
    out.values.push_back(ranking_mutual_information({d.data(), static_cast<std::size_t>(d.size())}, noise, sigma, mu));
  }
  return out;
}

double data_driven_sigma2(const Embedding& z) { return distance_stats(z).variance; }

}  // namespace infonn
