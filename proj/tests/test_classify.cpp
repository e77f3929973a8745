#include "infonn/classify.hpp"

#include "test_support.hpp"

#include <map>
#include <set>

using namespace infonn;

namespace {

ClassificationDataset make_blobs(int per_class, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  const double cx[] = {0.0, 5.0, 0.0, 5.0}, cy[] = {0.0, 0.0, 5.0, 5.0};
  ClassificationDataset d;
  d.train_x.resize(4 * per_class, 2);
  d.test_x.resize(4 * per_class, 2);
  for (int i = 0; i < 4 * per_class; ++i) {
    const int c = i % 4;
    d.train_x.row(i) << cx[c] + g(rng), cy[c] + g(rng);
    d.test_x.row(i) << cx[c] + g(rng), cy[c] + g(rng);
    d.train_y.push_back(c);
    d.test_y.push_back(c);
  }
  return d;
}

}  // namespace

TEST_CASE("classifiers separate blobs") {
  const auto d = make_blobs(30, 0.6, 1);
  for (auto kind : {ClassifierKind::nearest_centroid, ClassifierKind::knn, ClassifierKind::multinomial_logit}) {
    ClassifierSpec spec;
    spec.kind = kind;
    const auto m = Classifier::train(spec, d.train_x, d.train_y, {0, 1, 2, 3});
    CHECK(accuracy(m, d.test_x, d.test_y) >= 0.95);
    const Eigen::MatrixXd p = m.predict_proba(d.test_x);
    CHECK(p.rows() == d.test_x.rows());
    CHECK(p.cols() == 4);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
    CHECK(p.minCoeff() >= 0.0);
  }
  CHECK_THROWS(Classifier::train({}, d.train_x, std::vector<int>(d.train_y.size(), 0), {0}));
  CHECK_THROWS(Classifier::train({}, d.train_x, std::vector<int>{1, 2}, {1, 2}));
}

TEST_CASE("nearest centroid example") {
  Eigen::MatrixXd x(4, 1), probe(2, 1);
  x << 0, 2, 10, 12;
  probe << 0.5, 11;
  const auto m = Classifier::train({}, x, std::vector<int>{3, 3, 8, 8}, {3, 8});
  CHECK(m.predict(probe) == std::vector<int>{3, 8});
  CHECK(m.embed(probe) == probe);
}

TEST_CASE("max entropy picks the most uncertain items") {
  Eigen::MatrixXd x(4, 1), all(5, 1);
  x << -2, -1, 1, 2;
  all << -3, 0.1, 3, -0.05, 0.5;
  ClassifierSpec spec{ClassifierKind::multinomial_logit};
  const auto m = Classifier::train(spec, x, std::vector<int>{0, 0, 1, 1}, {0, 1});
  const auto picks = max_entropy_select(m, all, testing::ids({0, 1, 2, 3, 4}), 2);
  CHECK(std::set<ItemId>(picks.begin(), picks.end()) == std::set<ItemId>{ItemId{1}, ItemId{3}});
  CHECK_THROWS(max_entropy_select(m, all, testing::ids({0}), 2));
}

TEST_CASE("k-center greedy against exhaustive search") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd rows = testing::random_embedding(14, 2, 50 + seed);
    const auto lab = testing::ids({0});
    std::vector<ItemId> unl, all;
    for (std::size_t i = 0; i < 14; ++i) {
      all.emplace_back(i);
      if (i > 0) unl.emplace_back(i);
    }
    const auto greedy = k_center_select(rows, lab, unl, 3);
    REQUIRE(greedy.size() == 3);

    // First pick is the farthest item from the labeled one.
    std::size_t far = 1;
    for (std::size_t i = 2; i < 14; ++i)
      if ((rows.row(i) - rows.row(0)).norm() > (rows.row(far) - rows.row(0)).norm()) far = i;
    CHECK(greedy[0] == ItemId{far});

    std::vector<ItemId> centers = lab;
    centers.insert(centers.end(), greedy.begin(), greedy.end());
    const double greedy_r = cover_radius(rows, centers, all);
    double best = 1e300;
    for (std::size_t a = 1; a < 14; ++a)
      for (std::size_t b = a + 1; b < 14; ++b)
        for (std::size_t c = b + 1; c < 14; ++c)
          best = std::min(best, cover_radius(rows, testing::ids({0, a, b, c}), all));
    CHECK(greedy_r <= 2.0 * best + 1e-12);
    CHECK(greedy_r >= best);
  }
}

TEST_CASE("k-center and cover radius examples") {
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 10, 11;
  CHECK(k_center_select(x, testing::ids({0}), testing::ids({1, 2, 3, 4}), 2) == testing::ids({4, 2}));
  CHECK(cover_radius(x, testing::ids({0, 4}), testing::ids({0, 1, 2, 3, 4})) == 2.0);
}

TEST_CASE("balanced initial labels") {
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) y.push_back(i % 4);
  Rng rng(0);
  const auto init = balanced_initial_labels(y, 3, rng);
  CHECK(init.size() == 12);
  std::map<int, int> count;
  for (auto i : init) ++count[y[i.index]];
  for (const auto& [c, n] : count) CHECK(n == 3);
  CHECK(std::set<ItemId>(init.begin(), init.end()).size() == 12);
}

TEST_CASE("active classification loop invariants") {
  const auto d = make_blobs(25, 1.2, 3);
  Rng rng(1);
  const auto init = balanced_initial_labels(d.train_y, 2, rng);
  for (auto acq : {Acquisition::info_nn_m, Acquisition::random, Acquisition::max_entropy, Acquisition::k_center}) {
    ALConfig cfg;
    cfg.batch = 6;
    cfg.cycles = 4;
    cfg.acquisition = acq;
    cfg.n_samples = 100;
    cfg.model.kind = ClassifierKind::nearest_centroid;
    const auto r = al_classification_loop(d, init, cfg);
    REQUIRE(r.accuracy.size() == 5);
    CHECK(r.labeled.size() == init.size() + 4 * 6);
    std::set<ItemId> seen(init.begin(), init.end());
    for (const auto& batch : r.acquired) {
      CHECK(batch.size() == 6);
      for (auto i : batch) CHECK(seen.insert(i).second);
    }
    for (const auto& l : r.labeled) CHECK(l.label == d.train_y[l.item.index]);

    // Retraining from scratch on the final labeled set reproduces the last accuracy.
    Eigen::MatrixXd x(static_cast<Eigen::Index>(r.labeled.size()), 2);
    std::vector<int> y;
    for (std::size_t i = 0; i < r.labeled.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = d.train_x.row(static_cast<Eigen::Index>(r.labeled[i].item.index));
      y.push_back(r.labeled[i].label);
    }
    CHECK(accuracy(Classifier::train(cfg.model, x, y, {0, 1, 2, 3}), d.test_x, d.test_y) == r.accuracy.back());
    CHECK(al_classification_loop(d, init, cfg).accuracy == r.accuracy);
  }
  ALConfig too_many;
  too_many.batch = 200;
  too_many.cycles = 1;
  CHECK_THROWS(al_classification_loop(d, init, too_many));
}
