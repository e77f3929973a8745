#pragma once

#include "infonn/core.hpp"

namespace infonn {

struct KMeansResult {
  std::vector<int> assignment;  // group id per row, 0..k-1
  Eigen::MatrixXd centers;      // k x D
  double within_ss = 0.0;       // within-cluster sum of squares
  int iterations = 0;
};

/// Lloyd iterations from a seeded farthest-point initialization (first center
/// uniform, each next center the row farthest from all chosen centers). Stops
/// when assignments no longer change or after max_iters.
KMeansResult kmeans(const Eigen::MatrixXd& rows, std::size_t k, std::uint64_t seed, int max_iters = 100);

/// Within-cluster sum of squares of an assignment (centers = group means).
double within_cluster_ss(const Eigen::MatrixXd& rows, std::span<const int> assignment);

/// Majority label among the k nearest labeled rows. A tie between labels goes
/// to whichever tied label has the closer nearest member.
std::vector<int> knn_assign(const Eigen::MatrixXd& unlabeled, const Eigen::MatrixXd& labeled,
                            std::span<const int> labels, std::size_t k = 5);

}  // namespace infonn
