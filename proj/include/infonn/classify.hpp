#pragma once

#include "infonn/batch.hpp"

namespace infonn {

enum class ClassifierKind { nearest_centroid, knn, multinomial_logit };

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::nearest_centroid;
  std::size_t k = 5;           // knn
  double learning_rate = 0.5;  // multinomial_logit, full-batch gradient descent
  int epochs = 300;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
};

/// Lightweight classifier trained from scratch on the labeled set. Class
/// probability columns follow `classes()` (ascending label values).
class Classifier {
 public:
  static Classifier train(const ClassifierSpec& spec, const Eigen::MatrixXd& x, std::span<const int> labels,
                          std::vector<int> classes);

  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
  /// Feature map used as the embedding for acquisition: identity for the
  /// distance-based models, class scores for the logit model.
  Eigen::MatrixXd embed(const Eigen::MatrixXd& x) const;
  const std::vector<int>& classes() const { return classes_; }

 private:
  ClassifierSpec spec_;
  std::vector<int> classes_;
  Eigen::MatrixXd centroids_;  // nearest_centroid; rows follow classes_
  std::vector<bool> has_centroid_;
  Eigen::MatrixXd train_x_;  // knn
  std::vector<int> train_y_;
  Eigen::MatrixXd weights_;  // logit: (D+1) x C, last row is the bias
};

double accuracy(const Classifier& model, const Eigen::MatrixXd& x, std::span<const int> labels);

/// Top-b unlabeled items by predictive entropy; ties to the lower item id.
std::vector<ItemId> max_entropy_select(const Classifier& model, const Eigen::MatrixXd& x,
                                       std::span<const ItemId> unlabeled, std::size_t b);

/// Greedy k-center: repeatedly add the unlabeled item farthest from its
/// nearest labeled-or-selected item (ties to the lower id).
std::vector<ItemId> k_center_select(const Eigen::MatrixXd& rows, std::span<const ItemId> labeled,
                                    std::span<const ItemId> unlabeled, std::size_t b);

/// Largest distance from any item in `items` to its nearest center.
double cover_radius(const Eigen::MatrixXd& rows, std::span<const ItemId> centers, std::span<const ItemId> items);

enum class Acquisition { info_nn_m, max_entropy, random, k_center };

struct ClassificationDataset {
  Eigen::MatrixXd train_x;
  std::vector<int> train_y;
  Eigen::MatrixXd test_x;
  std::vector<int> test_y;
};

struct ALConfig {
  std::size_t batch = 10;  // b
  int cycles = 5;
  Acquisition acquisition = Acquisition::info_nn_m;
  ClassifierSpec model;
  std::size_t query_length = 3;  // m
  std::size_t n_samples = 1000;
  int kmeans_cycles = 3;  // k-means grouping for the first cycles, 5-NN vote afterwards
  std::uint64_t seed = 0;
};

struct ALResult {
  std::vector<double> accuracy;  // index 0: initial model, then one per cycle
  std::vector<std::vector<ItemId>> acquired;
  std::vector<LabeledItem> labeled;  // final labeled set
};

/// Active classification: train, acquire b items with the chosen strategy,
/// reveal their true labels, retrain from scratch, record test accuracy.
ALResult al_classification_loop(const ClassificationDataset& data, std::span<const ItemId> initial_labeled,
                                const ALConfig& cfg);

/// `per_class` items of every class, drawn uniformly.
std::vector<ItemId> balanced_initial_labels(std::span<const int> labels, std::size_t per_class, Rng& rng);

}  // namespace infonn
