#include "infonn/metrics.hpp"

#include "test_support.hpp"

using namespace infonn;

TEST_CASE("kendall tau examples") {
  const auto a = testing::ids({0, 1, 2, 3});
  CHECK(kendall_tau(a, a) == 1.0);
  CHECK(kendall_tau(a, testing::ids({3, 2, 1, 0})) == -1.0);
  CHECK(kendall_tau(testing::ids({0, 1, 2}), testing::ids({0, 2, 1})) == doctest::Approx(1.0 / 3.0));
  CHECK(kendall_tau(a, testing::ids({1, 0, 2, 3})) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS(kendall_tau(a, testing::ids({0, 1, 2})));
  CHECK_THROWS(kendall_tau(a, testing::ids({0, 1, 2, 5})));
}

TEST_CASE("triplet generalization accuracy") {
  Embedding z(4, 1);
  z << 0, 1, 3, 3;
  const std::vector<PairedComparison> s{{ItemId{0}, ItemId{1}, ItemId{2}},
                                        {ItemId{0}, ItemId{2}, ItemId{1}},
                                        {ItemId{0}, ItemId{2}, ItemId{3}},
                                        {ItemId{1}, ItemId{0}, ItemId{2}}};
  CHECK(triplet_generalization_accuracy(z, s) == 0.5);

  const Embedding r = testing::random_embedding(20, 3, 1);
  Rng rng(2);
  std::vector<PairedComparison> t, rev;
  for (int i = 0; i < 500; ++i) {
    const auto q = random_query(20, 2, rng);
    t.push_back({q.reference, q.candidates[0], q.candidates[1]});
    rev.push_back({q.reference, q.candidates[1], q.candidates[0]});
  }
  CHECK(triplet_generalization_accuracy(r, t) + triplet_generalization_accuracy(r, rev) == doctest::Approx(1.0));
  CHECK_THROWS(triplet_generalization_accuracy(r, std::vector<PairedComparison>{}));
}

TEST_CASE("aggregate kendall") {
  const Embedding truth = testing::random_embedding(12, 2, 3);
  CHECK(aggregate_kendall(truth, truth) == doctest::Approx(1.0));
  const Eigen::MatrixXd q = testing::random_rotation(2, 4);
  CHECK(aggregate_kendall(Embedding(3.0 * truth * q), truth) == doctest::Approx(1.0));

  // All points coincident: index tie-breaking makes every estimated ranking
  // the identity order, so the value is fixed by the truth alone.
  Embedding line(5, 1);
  line << 0, 1, 3, 6, 10;
  CHECK(aggregate_kendall(Embedding::Zero(5, 1), line) == doctest::Approx(0.2).epsilon(1e-12));

  double total = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s)
    total += aggregate_kendall(testing::random_embedding(20, 2, 100 + s), testing::random_embedding(20, 2, 900 + s));
  CHECK(std::abs(total / 50.0) <= 0.15);
}

TEST_CASE("distance ranking and neighbors") {
  Embedding z(5, 1);
  z << 0, 2, -1, 2, 5;
  CHECK(distance_ranking(z, ItemId{0}) == testing::ids({2, 1, 3, 4}));
  CHECK(nearest_neighbors(z, 0, 3) == std::vector<std::size_t>{2, 1, 3});
  CHECK(nearest_neighbors(z, 1, 1) == std::vector<std::size_t>{3});
}

TEST_CASE("recall and top fraction against brute force") {
  Embedding z(6, 1);
  z << 0, 0.5, 5, 5.5, 20, 40;
  const std::vector<int> labels{0, 0, 1, 1, 1, 0};
  CHECK(recall_at_k(z, labels, 1) == doctest::Approx(5.0 / 6.0));
  CHECK(top_fraction_at_k(z, {2, 3, 4}, 2) == doctest::Approx((0.5 + 0.5 + 1.0) / 3.0));

  const Embedding r = testing::random_embedding(30, 2, 7);
  std::vector<int> lab;
  for (int i = 0; i < 30; ++i) lab.push_back(i % 3);
  const std::set<std::size_t> top{0, 3, 5, 8, 13, 21};
  for (std::size_t k : {1u, 3u, 5u}) {
    double hits = 0.0, frac = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t j = 0; j < 30; ++j)
        if (j != i) d.push_back({(r.row(i) - r.row(j)).norm(), j});
      std::sort(d.begin(), d.end());
      bool any = false;
      int in_top = 0;
      for (std::size_t m = 0; m < k; ++m) {
        any = any || lab[d[m].second] == lab[i];
        in_top += top.count(d[m].second) ? 1 : 0;
      }
      hits += any ? 1.0 : 0.0;
      if (top.count(i)) frac += static_cast<double>(in_top) / static_cast<double>(k);
    }
    CHECK(recall_at_k(r, lab, k) == doctest::Approx(hits / 30.0));
    CHECK(top_fraction_at_k(r, top, k) == doctest::Approx(frac / static_cast<double>(top.size())));
  }
}

TEST_CASE("recall and top fraction trivial cases") {
  Embedding z(6, 1);
  z << 0, 0.1, 0.2, 50, 50.1, 50.2;
  CHECK(recall_at_k(z, std::vector<int>{0, 0, 0, 1, 1, 1}, 1) == 1.0);
  CHECK(recall_at_k(z, std::vector<int>{0, 1, 2, 3, 4, 5}, 2) == 0.0);
  CHECK(top_fraction_at_k(z, {0, 1, 2}, 2) == 1.0);
  Embedding spread(6, 1);
  spread << 0, 1, 10, 11, 20, 21;
  CHECK(top_fraction_at_k(spread, {0, 2, 4}, 1) == 0.0);
  CHECK_THROWS(recall_at_k(z, std::vector<int>(6, 0), 6));
  CHECK_THROWS(top_fraction_at_k(z, {}, 2));
}

TEST_CASE("top fraction under a random embedding matches the exchangeable null") {
  std::vector<double> v;
  std::set<std::size_t> top;
  for (std::size_t i = 0; i < 22; ++i) top.insert(i * 6);
  for (std::uint64_t s = 0; s < 50; ++s) v.push_back(top_fraction_at_k(testing::random_embedding(133, 2, 7000 + s), top, 21));
  double mean = 0.0, ss = 0.0;
  for (double x : v) mean += x / 50.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / 49.0 / 50.0);
  CHECK(std::abs(mean - 21.0 / 132.0) <= 3.0 * se);
}

TEST_CASE("quantiles") {
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.25) == 1.75);
  CHECK(quantile({5.0}, 0.75) == 5.0);
  CHECK(quantile({1.0, 9.0}, 0.0) == 1.0);
  CHECK(quantile({1.0, 9.0}, 1.0) == 9.0);
  CHECK_THROWS(quantile({}, 0.5));
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto s = summarize(v);
  CHECK(s.median == 3.0);
  CHECK(s.q25 == 2.0);
  CHECK(s.q75 == 4.0);
}
