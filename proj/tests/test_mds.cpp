#include "infonn/mds.hpp"

#include "test_support.hpp"

using namespace infonn;

namespace {

std::vector<PairedComparison> random_comparisons(std::size_t n, std::size_t count, Rng& rng, std::size_t skip = SIZE_MAX) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<PairedComparison> s;
  while (s.size() < count) {
    const std::size_t r = pick(rng), w = pick(rng), l = pick(rng);
    if (r == w || r == l || w == l || r == skip || w == skip || l == skip) continue;
    s.push_back({ItemId{r}, ItemId{w}, ItemId{l}});
  }
  return s;
}

// Literal transcription of the loss, one comparison at a time.
double naive_loss(const Embedding& z, const std::vector<PairedComparison>& s, double mu) {
  double total = 0.0;
  for (const auto& c : s) {
    double dw = 0.0, dl = 0.0;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      dw += std::pow(z(c.reference.index, j) - z(c.winner.index, j), 2);
      dl += std::pow(z(c.reference.index, j) - z(c.loser.index, j), 2);
    }
    const double pw = 1.0 / (dw + mu), pl = 1.0 / (dl + mu);
    total += -std::log(pw / (pw + pl));
  }
  return total / static_cast<double>(s.size());
}

}  // namespace

TEST_CASE("loss examples") {
  Embedding z(3, 1);
  z << 0.0, 1.0, -1.0;
  const std::vector<PairedComparison> s{{ItemId{0}, ItemId{1}, ItemId{2}}};
  CHECK(pair_log_loss(z, s, 0.1) == doctest::Approx(std::log(2.0)));
  Embedding z2(3, 1);
  z2 << 0.0, 1.0, 2.0;
  CHECK(pair_log_loss(z2, s, 0.0) == doctest::Approx(std::log(5.0 / 4.0)));
  CHECK_THROWS(pair_log_loss(z, std::vector<PairedComparison>{}, 0.1));

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Embedding zr = testing::random_embedding(10, 3, 100 + static_cast<std::uint64_t>(t));
    const auto sr = random_comparisons(10, 40, rng);
    Embedding g;
    CHECK(pair_log_loss(zr, sr, 0.05) == doctest::Approx(naive_loss(zr, sr, 0.05)).epsilon(1e-12));
    CHECK(pair_log_loss_with_grad(zr, sr, 0.05, g) == doctest::Approx(naive_loss(zr, sr, 0.05)).epsilon(1e-12));
  }
}

TEST_CASE("gradient agrees with central finite differences") {
  Rng rng(8);
  const double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 6 + static_cast<std::size_t>(t % 5), d = 1 + static_cast<std::size_t>(t % 3);
    const Embedding z = testing::random_embedding(n, d, 500 + static_cast<std::uint64_t>(t));
    const auto s = random_comparisons(n, 15, rng);
    const double mu = 0.05 + 0.1 * (t % 4);
    const Embedding g = pair_log_loss_grad(z, s, mu);
    Embedding fd(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        Embedding zp = z, zm = z;
        zp(i, j) += h;
        zm(i, j) -= h;
        fd(i, j) = (pair_log_loss(zp, s, mu) - pair_log_loss(zm, s, mu)) / (2 * h);
      }
    worst = std::max(worst, (g - fd).norm() / std::max(1.0, fd.norm()));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("items outside the comparisons get zero gradient") {
  Rng rng(2);
  const Embedding z = testing::random_embedding(9, 2, 4);
  const auto s = random_comparisons(9, 30, rng, 4);
  const Embedding g = pair_log_loss_grad(z, s, 0.1);
  CHECK(g.row(4).norm() == 0.0);
}

TEST_CASE("loss and gradient respect rigid motions") {
  Rng rng(5);
  const Embedding z = testing::random_embedding(12, 3, 6);
  const auto s = random_comparisons(12, 50, rng);
  const Eigen::MatrixXd q = testing::random_rotation(3, 9);
  const Eigen::RowVector3d shift(1.5, -2.0, 0.25);
  const Embedding moved = (z * q).rowwise() + shift;
  CHECK(std::abs(pair_log_loss(moved, s, 0.2) - pair_log_loss(z, s, 0.2)) <= 1e-9);
  const Embedding g = pair_log_loss_grad(z, s, 0.2);
  CHECK((pair_log_loss_grad(moved, s, 0.2) - g * q).norm() <= 1e-9);
  CHECK(g.colwise().sum().norm() <= 1e-12);
}

TEST_CASE("fit never raises the loss") {
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    const Embedding truth = testing::random_embedding(15, 2, 40 + static_cast<std::uint64_t>(t));
    ComparisonStore store;
    for (auto c : random_comparisons(15, 60, rng)) {
      const double dw = (truth.row(c.reference.index) - truth.row(c.winner.index)).norm();
      const double dl = (truth.row(c.reference.index) - truth.row(c.loser.index)).norm();
      if (dl < dw) std::swap(c.winner, c.loser);
      store.append(c);
    }
    Rng init_rng(static_cast<std::uint64_t>(t));
    const Embedding z0 = uniform_init(15, 2, init_rng);
    for (double alpha : {0.05, 0.5, 50.0}) {
      const MDSConfig cfg{alpha, 100, {1.0, MuSchedule::diminishing, 0.99}, MDSInit::uniform01};
      FitReport rep;
      const Embedding z = mds_fit(z0, store, cfg, t, &rep);
      CHECK(rep.loss_after <= rep.loss_before);
      CHECK(rep.mu == doctest::Approx(distance_stats(z0).max * std::pow(0.99, t)));
      CHECK(pair_log_loss(z, store.items(), rep.mu) == doctest::Approx(rep.loss_after).epsilon(1e-12));
      CHECK(pair_log_loss(z0, store.items(), rep.mu) == doctest::Approx(rep.loss_before).epsilon(1e-12));
    }
  }
}

TEST_CASE("fit edge cases") {
  Rng rng(1);
  const Embedding z0 = uniform_init(6, 2, rng);
  ComparisonStore store;
  store.append(PairedComparison{ItemId{0}, ItemId{1}, ItemId{2}});
  MDSConfig tiny{1e-300, 10, {0.1, MuSchedule::constant, 0.99}, MDSInit::uniform01};
  CHECK((mds_fit(z0, store, tiny, 0) - z0).norm() == 0.0);
  CHECK_THROWS(mds_fit(z0, store, MDSConfig{0.5, 0}, 0));
  CHECK_THROWS(mds_fit(z0, store, MDSConfig{0.0, 10}, 0));
  CHECK_THROWS(mds_fit(z0, ComparisonStore{}, MDSConfig{}, 0));
  ComparisonStore bad;
  bad.append(PairedComparison{ItemId{0}, ItemId{1}, ItemId{9}});
  CHECK_THROWS(mds_fit(z0, bad, MDSConfig{}, 0));
  const Embedding u = uniform_init(50, 3, rng);
  CHECK(u.minCoeff() >= 0.0);
  CHECK(u.maxCoeff() < 1.0);
}
