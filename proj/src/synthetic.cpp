#include "infonn/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace infonn {

Eigen::MatrixXd standard_normal_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
  return m;
}

Eigen::MatrixXd random_mahalanobis_metric(std::size_t dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("metric dimension must be at least 1");
  const Eigen::MatrixXd a = standard_normal_matrix(dim, dim, rng);
  Eigen::MatrixXd m = a * a.transpose() / static_cast<double>(dim);
  return (m + m.transpose()) / 2.0;
}

QueryPool random_query_pool(std::size_t n_items, std::size_t length, std::size_t count, Rng& rng) {
  QueryPool pool;
  pool.origin = PoolOrigin::subsampled;
  pool.queries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pool.queries.push_back(random_query(n_items, length, rng));
  return pool;
}

std::vector<PairedComparison> truth_triplets(const GroundTruth& truth, std::size_t count, Rng& rng) {
  std::vector<PairedComparison> out;
  out.reserve(count);
  while (out.size() < count) {
    const NNQuery q = random_query(truth.n_items(), 2, rng);
    const double a = truth.distance(q.reference, q.candidates[0]);
    const double b = truth.distance(q.reference, q.candidates[1]);
    if (a == b) continue;
    out.push_back(a < b ? PairedComparison{q.reference, q.candidates[0], q.candidates[1]}
                        : PairedComparison{q.reference, q.candidates[1], q.candidates[0]});
  }
  return out;
}

ClassificationDataset gaussian_blobs(std::size_t n_train, std::size_t n_test, std::size_t classes, double std_dev,
                                     double radius, Rng& rng) {
  if (classes < 2) throw std::invalid_argument("need at least 2 classes");
  if (!(std_dev > 0.0)) throw std::invalid_argument("blob std must be positive");
  std::normal_distribution<double> n(0.0, std_dev);
  auto draw = [&](std::size_t count, Eigen::MatrixXd& x, std::vector<int>& y) {
    x.resize(static_cast<Eigen::Index>(count), 2);
    y.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto c = i % classes;
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = radius * std::cos(angle) + n(rng);
      x(r, 1) = radius * std::sin(angle) + n(rng);
      y[i] = static_cast<int>(c);
    }
  };
  ClassificationDataset d;
  draw(n_train, d.train_x, d.train_y);
  draw(n_test, d.test_x, d.test_y);
  return d;
}

}  // namespace infonn
