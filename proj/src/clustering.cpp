#include "infonn/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace infonn {

double within_cluster_ss(const Eigen::MatrixXd& rows, std::span<const int> assignment) {
  std::map<int, std::pair<Eigen::VectorXd, int>> sums;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    auto [it, fresh] = sums.try_emplace(assignment[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(rows.cols()), 0);
    it->second.first += rows.row(i).transpose();
    ++it->second.second;
  }
  double ss = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const auto& [sum, count] = sums.at(assignment[static_cast<std::size_t>(i)]);
    ss += (rows.row(i).transpose() - sum / count).squaredNorm();
  }
  return ss;
}

KMeansResult kmeans(const Eigen::MatrixXd& rows, std::size_t k, std::uint64_t seed, int max_iters) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (k > n) throw std::invalid_argument("kmeans: k exceeds the number of points");
  if (max_iters < 1) throw std::invalid_argument("kmeans: max_iters must be positive");

  KMeansResult out;
  out.centers.resize(static_cast<Eigen::Index>(k), rows.cols());
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  out.centers.row(0) = rows.row(static_cast<Eigen::Index>(first(rng)));
  Eigen::VectorXd nearest = (rows.rowwise() - out.centers.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    Eigen::Index far = 0;
    nearest.maxCoeff(&far);
    out.centers.row(static_cast<Eigen::Index>(c)) = rows.row(far);
    nearest = nearest.cwiseMin((rows.rowwise() - rows.row(far)).rowwise().squaredNorm());
  }

  out.assignment.assign(n, -1);
  for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (out.centers.rowwise() - rows.row(static_cast<Eigen::Index>(i))).rowwise().squaredNorm().minCoeff(&best);
      if (out.assignment[i] != static_cast<int>(best)) {
        out.assignment[i] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), rows.cols());
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(out.assignment[i]) += rows.row(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(out.assignment[i])];
    }
    // Empty clusters keep their previous center.
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0) out.centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / counts[c];
  }
  out.within_ss = within_cluster_ss(rows, out.assignment);
  return out;
}

std::vector<int> knn_assign(const Eigen::MatrixXd& unlabeled, const Eigen::MatrixXd& labeled,
                            std::span<const int> labels, std::size_t k) {
  const auto n_lab = static_cast<std::size_t>(labeled.rows());
  if (labels.size() != n_lab) throw std::invalid_argument("knn_assign: label count mismatch");
  if (k == 0 || k > n_lab) throw std::invalid_argument("knn_assign: k must be in 1..#labeled");
  if (labeled.cols() != unlabeled.cols()) throw std::invalid_argument("knn_assign: dimension mismatch");

  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(unlabeled.rows()));
  std::vector<std::size_t> order(n_lab);
  for (Eigen::Index u = 0; u < unlabeled.rows(); ++u) {
    const Eigen::VectorXd d = (labeled.rowwise() - unlabeled.row(u)).rowwise().squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = d(static_cast<Eigen::Index>(a)), db = d(static_cast<Eigen::Index>(b));
                        return da < db || (da == db && a < b);
                      });
    std::map<int, int> votes;
    int top = 0;
    for (std::size_t i = 0; i < k; ++i) top = std::max(top, ++votes[labels[order[i]]]);
    // Walk neighbors nearest-first; the first label with the top vote count wins.
    for (std::size_t i = 0; i < k; ++i) {
      if (votes[labels[order[i]]] == top) {
        out.push_back(labels[order[i]]);
        break;
      }
    }
  }
  return out;
}

}  // namespace infonn
