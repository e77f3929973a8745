#pragma once

#include "infonn/classify.hpp"
#include "infonn/oracle.hpp"

namespace infonn {

/// N x D matrix of independent standard normal entries.
Eigen::MatrixXd standard_normal_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// Random PSD metric A A^T / D with standard normal A.
Eigen::MatrixXd random_mahalanobis_metric(std::size_t dim, Rng& rng);

/// `count` uniformly random NN queries of length C (repeats possible).
QueryPool random_query_pool(std::size_t n_items, std::size_t length, std::size_t count, Rng& rng);

/// Random triplets ordered by the ground truth; exact ties are redrawn.
std::vector<PairedComparison> truth_triplets(const GroundTruth& truth, std::size_t count, Rng& rng);

/// 2-D isotropic Gaussian blobs with centers evenly spaced on a circle,
/// labels balanced round-robin over classes.
ClassificationDataset gaussian_blobs(std::size_t n_train, std::size_t n_test, std::size_t classes, double std_dev,
                                     double radius, Rng& rng);

}  // namespace infonn
