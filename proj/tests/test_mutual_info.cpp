#include "infonn/mutual_info.hpp"

#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <numeric>

using namespace infonn;
using testing::nn;

namespace {

// Golden values from adaptive/tensor quadrature (offline), cross-checked below
// by the in-test quadrature oracles.
constexpr double kEmbeddingGolden = 0.2399227142;  // r=0, candidates at +1 and -1, mu=0.1, sigma^2=0.25
constexpr double kDistancesGolden = 0.2186828601;  // D_q=[1,1], mu=0.1, sigma^2=1

struct Rule {
  std::vector<double> x, w;
};

// Golub-Welsch: nodes/weights of the Gauss rule for a symmetric Jacobi matrix.
Rule gauss_rule(const Eigen::VectorXd& offdiag, double mass) {
  const Eigen::Index n = offdiag.size() + 1;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) j(k, k + 1) = j(k + 1, k) = offdiag(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
  Rule r;
  for (Eigen::Index k = 0; k < n; ++k) {
    r.x.push_back(eig.eigenvalues()(k));
    r.w.push_back(mass * eig.eigenvectors()(0, k) * eig.eigenvectors()(0, k));
  }
  return r;
}

// Probabilists' Hermite rule: integrates against the standard normal density.
Rule hermite(int n) {
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  return gauss_rule(off, 1.0);
}

Rule legendre(int n) {
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return gauss_rule(off, 2.0);
}

double h2(double p) {
  double h = 0.0;
  if (p > 0) h -= p * std::log(p);
  if (p < 1) h -= (1 - p) * std::log(1 - p);
  return h;
}

double pl_first(double sq1, double sq2, double mu) {
  const double u1 = 1.0 / (sq1 + mu), u2 = 1.0 / (sq2 + mu);
  return u1 / (u1 + u2);
}

// Embedding perturbation: all three 1-D coordinates get N(0, sigma^2).
double embedding_quadrature(int n) {
  const Rule g = hermite(n);
  const double s = 0.5, mu = 0.1;
  double ep = 0.0, eh = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double w = g.w[a] * g.w[b] * g.w[c];
        const double r = s * g.x[a], t1 = 1.0 + s * g.x[b], t2 = -1.0 + s * g.x[c];
        const double p = pl_first((t1 - r) * (t1 - r), (t2 - r) * (t2 - r), mu);
        ep += w * p;
        eh += w * h2(p);
      }
  return h2(ep) - eh;
}

// Distance perturbation: two independent N(1, 1) distances; the integrand
// peaks sharply at D = 0, so use composite Gauss-Legendre panels.
double distances_quadrature(int panels, int nodes) {
  const Rule gl = legendre(nodes);
  const double lo = -9.0, hi = 11.0, width = (hi - lo) / panels;
  std::vector<double> xs, ws;
  for (int p = 0; p < panels; ++p)
    for (int k = 0; k < nodes; ++k) {
      const double x = lo + width * (p + 0.5 * (gl.x[k] + 1.0));
      const double dens = std::exp(-0.5 * (x - 1.0) * (x - 1.0)) / std::sqrt(2.0 * M_PI);
      xs.push_back(x);
      ws.push_back(0.5 * width * gl.w[k] * dens);
    }
  double ep = 0.0, eh = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = 0; b < xs.size(); ++b) {
      const double p = pl_first(xs[a] * xs[a], xs[b] * xs[b], 0.1);
      ep += ws[a] * ws[b] * p;
      eh += ws[a] * ws[b] * h2(p);
    }
  return h2(ep) - eh;
}

Embedding line3() {
  Embedding z(3, 1);
  z << 0.0, 1.0, -1.0;
  return z;
}

QueryPool single(NNQuery q) {
  QueryPool p;
  p.queries.push_back(std::move(q));
  return p;
}

double plain_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

}  // namespace

TEST_CASE("quadrature oracles reproduce the frozen goldens") {
  CHECK(embedding_quadrature(60) == doctest::Approx(kEmbeddingGolden).epsilon(1e-8));
  CHECK(distances_quadrature(800, 8) == doctest::Approx(kDistancesGolden).epsilon(1e-7));
}

TEST_CASE("embedding estimator matches quadrature at n_s = 1e6") {
  const MIConfig cfg{MIVariant::embedding, 0.25, 1000000, 17};
  const double mi = info_nn_embedding(line3(), single(nn(0, {1, 2})), cfg, 0.1).values.at(0);
  CHECK(std::abs(mi - kEmbeddingGolden) <= 1e-2);
}

TEST_CASE("distances estimator matches quadrature at n_s = 1e6") {
  const MIConfig cfg{MIVariant::distances, 1.0, 1000000, 17};
  const double mi = info_nn_distances(line3(), single(nn(0, {1, 2})), cfg, 0.1).values.at(0);
  CHECK(std::abs(mi - kDistancesGolden) <= 1e-2);
}

TEST_CASE("sigma = 0 gives exactly zero") {
  const Embedding z = testing::random_embedding(10, 3, 1);
  Rng rng(0);
  const auto pool = enumerate_candidate_queries(10, 3, ItemId{2}, std::nullopt, rng);
  for (auto variant : {MIVariant::embedding, MIVariant::distances}) {
    const auto s = score_pool(z, pool, {variant, 0.0, 50, 3}, 0.5);
    for (double v : s.values) CHECK(v == 0.0);
  }
  std::vector<RankingQuery> rq;
  for (const auto& q : pool.queries) rq.push_back({q.reference, q.candidates});
  for (double v : ranking_mi(z, rq, {MIVariant::distances, 0.0, 50, 3}, 0.5).values) CHECK(v == 0.0);
}

TEST_CASE("MI stays within [0, ln #outcomes] on random queries") {
  Rng rng(42);
  std::uniform_real_distribution<double> mu_d(1e-4, 3.0), s2_d(1e-3, 4.0);
  int checked = 0;
  for (int round = 0; round < 100; ++round) {
    const Embedding z = testing::random_embedding(12, 2, 1000 + static_cast<std::uint64_t>(round));
    const std::size_t c = 2 + static_cast<std::size_t>(round % 4);
    QueryPool pool;
    for (int i = 0; i < 100; ++i) pool.queries.push_back(random_query(12, c, rng));
    const double mu = mu_d(rng), s2 = s2_d(rng);
    const MIConfig cfg{MIVariant::distances, s2, 64, static_cast<std::uint64_t>(round)};
    const double bound = std::log(static_cast<double>(c)) + 1e-6;
    for (auto variant : {MIVariant::embedding, MIVariant::distances}) {
      MIConfig v = cfg;
      v.variant = variant;
      for (double mi : score_pool(z, pool, v, mu).values) {
        CHECK(mi >= -1e-6);
        CHECK(mi <= bound);
      }
    }
    checked += 100;
    if (c <= 4 && round % 5 == 0) {
      std::vector<RankingQuery> rq;
      for (const auto& q : pool.queries) rq.push_back({q.reference, q.candidates});
      double fact = 1.0;
      for (std::size_t k = 2; k <= c; ++k) fact *= static_cast<double>(k);
      for (double mi : ranking_mi(z, rq, cfg, mu).values) {
        CHECK(mi >= -1e-6);
        CHECK(mi <= std::log(fact) + 1e-6);
      }
    }
  }
  CHECK(checked == 10000);
}

TEST_CASE("ranking MI equals NN MI at C = 2 under shared samples") {
  const Embedding z = testing::random_embedding(15, 3, 8);
  Rng rng(1);
  QueryPool pool;
  for (int i = 0; i < 300; ++i) pool.queries.push_back(random_query(15, 2, rng));
  std::vector<RankingQuery> rq;
  for (const auto& q : pool.queries) rq.push_back({q.reference, q.candidates});
  const MIConfig cfg{MIVariant::distances, 0.7, 200, 5};
  const auto a = info_nn_distances(z, pool, cfg, 0.3);
  const auto b = ranking_mi(z, rq, cfg, 0.3);
  for (std::size_t i = 0; i < pool.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-9);
}

TEST_CASE("ranking MI at C = 3 matches brute-force permutation enumeration") {
  const Eigen::MatrixXd noise = standard_normal_block(3, 20000, 77);
  const std::vector<double> base{0.8, 1.3, 2.1};
  const double sigma = 0.9, mu = 0.2;
  const std::vector<std::array<int, 3>> perms{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<double> pbar(6, 0.0);
  double hbar = 0.0;
  for (Eigen::Index s = 0; s < noise.cols(); ++s) {
    std::array<double, 3> u{};
    for (int i = 0; i < 3; ++i) {
      const double d = base[i] + sigma * noise(i, s);
      u[i] = 1.0 / (d * d + mu);
    }
    std::vector<double> p;
    for (const auto& pm : perms) p.push_back(u[pm[0]] / (u[0] + u[1] + u[2]) * u[pm[1]] / (u[pm[1]] + u[pm[2]]));
    for (int k = 0; k < 6; ++k) pbar[k] += p[k];
    hbar += plain_entropy(p);
  }
  for (auto& v : pbar) v /= static_cast<double>(noise.cols());
  const double expected = plain_entropy(pbar) - hbar / static_cast<double>(noise.cols());
  CHECK(ranking_mutual_information(base, noise, sigma, mu) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("MI is invariant to candidate order when noise follows the candidates") {
  const Eigen::MatrixXd noise = standard_normal_block(4, 5000, 3);
  const std::vector<double> base{0.5, 1.5, 1.0, 2.5};
  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<double> pbase;
  Eigen::MatrixXd pnoise(4, noise.cols());
  for (int i = 0; i < 4; ++i) {
    pbase.push_back(base[perm[i]]);
    pnoise.row(i) = noise.row(perm[i]);
  }
  CHECK(nn_mutual_information(pbase, pnoise, 0.6, 0.1) ==
        doctest::Approx(nn_mutual_information(base, noise, 0.6, 0.1)).epsilon(1e-12));
  CHECK(ranking_mutual_information(pbase, pnoise, 0.6, 0.1) ==
        doctest::Approx(ranking_mutual_information(base, noise, 0.6, 0.1)).epsilon(1e-12));
}

TEST_CASE("distances estimator converges") {
  const Embedding z = testing::random_embedding(6, 2, 12);
  const auto pool = single(nn(0, {1, 2, 3}));
  std::vector<double> small;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    small.push_back(info_nn_distances(z, pool, {MIVariant::distances, 0.5, 100000, 100 + seed}, 0.2).values[0]);
  const double mean = std::accumulate(small.begin(), small.end(), 0.0) / 10.0;
  double ss = 0.0;
  for (double v : small) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / 9.0);
  const double big = info_nn_distances(z, pool, {MIVariant::distances, 0.5, 1000000, 7}, 0.2).values[0];
  CHECK(std::abs(small[0] - big) <= 3.0 * se);
}

TEST_CASE("scaling Z, mu and sigma^2 together leaves distance-space MI unchanged") {
  const Embedding z = testing::random_embedding(10, 2, 21);
  Rng rng(0);
  QueryPool pool;
  for (int i = 0; i < 200; ++i) pool.queries.push_back(random_query(10, 3, rng));
  const MIConfig cfg{MIVariant::distances, 0.4, 100, 9};
  const auto base = info_nn_distances(z, pool, cfg, 0.3);
  for (double s : {0.5, 2.0, 10.0}) {
    MIConfig scaled = cfg;
    scaled.sigma2 = cfg.sigma2 * s * s;
    const auto r = info_nn_distances(Embedding(s * z), pool, scaled, 0.3 * s * s);
    CHECK(r.argmax() == base.argmax());
    for (std::size_t i = 0; i < pool.size(); ++i) CHECK(std::abs(r.values[i] - base.values[i]) < 1e-9);
  }
}

TEST_CASE("scores are seeded and independent of pool order") {
  const Embedding z = testing::random_embedding(10, 2, 30);
  Rng rng(0);
  QueryPool pool;
  for (int i = 0; i < 50; ++i) pool.queries.push_back(random_query(10, 3, rng));
  QueryPool reversed = pool;
  std::reverse(reversed.queries.begin(), reversed.queries.end());
  for (auto variant : {MIVariant::embedding, MIVariant::distances}) {
    const MIConfig cfg{variant, 0.5, 100, 4};
    const auto a = score_pool(z, pool, cfg, 0.2);
    CHECK(a.values == score_pool(z, pool, cfg, 0.2).values);
    const auto b = score_pool(z, reversed, cfg, 0.2);
    for (std::size_t i = 0; i < pool.size(); ++i) CHECK(a.values[i] == b.values[pool.size() - 1 - i]);
  }
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(MIScores{{0.1, 0.3, 0.3, 0.2}}.argmax() == 1);
  CHECK(MIScores{{0.0}}.argmax() == 0);
  CHECK_THROWS(MIScores{}.argmax());
}

TEST_CASE("config validation and helpers") {
  CHECK_THROWS(validate_mi_config({MIVariant::distances, -1.0, 10, 0}));
  CHECK_THROWS(validate_mi_config({MIVariant::distances, 1.0, 0, 0}));
  CHECK_THROWS(info_nn_distances(line3(), QueryPool{}, {}, 0.1));
  const Embedding z = testing::random_embedding(7, 2, 2);
  CHECK(data_driven_sigma2(z) == distance_stats(z).variance);
  std::vector<RankingQuery> big{{ItemId{0}, testing::ids({1, 2, 3, 4, 5, 6, 7})}};
  CHECK_THROWS(ranking_mi(testing::random_embedding(8, 2, 1), big, {}, 0.1));
}
