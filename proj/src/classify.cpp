#include "infonn/classify.hpp"

#include "infonn/plmodel.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace infonn {

namespace {

std::size_t class_index(const std::vector<int>& classes, int label) {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) throw std::invalid_argument("label not in class list");
  return static_cast<std::size_t>(it - classes.begin());
}

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd scores) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - m).exp().matrix();
    scores.row(i) /= scores.row(i).sum();
  }
  return scores;
}

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd xb(x.rows(), x.cols() + 1);
  xb << x, Eigen::VectorXd::Ones(x.rows());
  return xb;
}

}  // namespace

Classifier Classifier::train(const ClassifierSpec& spec, const Eigen::MatrixXd& x, std::span<const int> labels,
                             std::vector<int> classes) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw std::invalid_argument("classifier: label count mismatch");
  if (labels.empty()) throw std::invalid_argument("classifier: empty training set");
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw std::invalid_argument("classifier: need at least 2 classes");

  Classifier m;
  m.spec_ = spec;
  m.classes_ = std::move(classes);
  const auto c = static_cast<Eigen::Index>(m.classes_.size());

  switch (spec.kind) {
    case ClassifierKind::nearest_centroid: {
      m.centroids_ = Eigen::MatrixXd::Zero(c, x.cols());
      std::vector<int> counts(m.classes_.size(), 0);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto k = class_index(m.classes_, labels[i]);
        m.centroids_.row(static_cast<Eigen::Index>(k)) += x.row(static_cast<Eigen::Index>(i));
        ++counts[k];
      }
      m.has_centroid_.assign(m.classes_.size(), false);
      for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) continue;
        m.centroids_.row(static_cast<Eigen::Index>(k)) /= counts[k];
        m.has_centroid_[k] = true;
      }
      break;
    }
    case ClassifierKind::knn:
      if (spec.k < 1) throw std::invalid_argument("knn classifier: k must be positive");
      m.train_x_ = x;
      m.train_y_.assign(labels.begin(), labels.end());
      break;
    case ClassifierKind::multinomial_logit: {
      if (spec.epochs < 1 || !(spec.learning_rate > 0.0)) throw std::invalid_argument("logit: bad training settings");
      const Eigen::MatrixXd xb = with_bias(x);
      Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(x.rows(), c);
      for (std::size_t i = 0; i < labels.size(); ++i)
        onehot(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(class_index(m.classes_, labels[i]))) = 1.0;
      Rng rng(spec.seed);
      std::normal_distribution<double> init(0.0, 0.01);
      m.weights_ = Eigen::MatrixXd(xb.cols(), c);
      for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < xb.cols(); ++i) m.weights_(i, j) = init(rng);
      const double inv_n = 1.0 / static_cast<double>(x.rows());
      for (int e = 0; e < spec.epochs; ++e) {
        const Eigen::MatrixXd p = softmax_rows(xb * m.weights_);
        Eigen::MatrixXd grad = xb.transpose() * (p - onehot) * inv_n;
        grad.topRows(x.cols()) += spec.l2 * m.weights_.topRows(x.cols());
        m.weights_ -= spec.learning_rate * grad;
      }
      break;
    }
  }
  return m;
}

Eigen::MatrixXd Classifier::predict_proba(const Eigen::MatrixXd& x) const {
  const auto c = static_cast<Eigen::Index>(classes_.size());
  switch (spec_.kind) {
    case ClassifierKind::nearest_centroid: {
      Eigen::MatrixXd scores(x.rows(), c);
      for (Eigen::Index k = 0; k < c; ++k) {
        if (!has_centroid_[static_cast<std::size_t>(k)]) {
          scores.col(k).setConstant(-std::numeric_limits<double>::infinity());
          continue;
        }
        scores.col(k) = -(x.rowwise() - centroids_.row(k)).rowwise().squaredNorm();
      }
      return softmax_rows(std::move(scores));
    }
    case ClassifierKind::knn: {
      const std::size_t k = std::min(spec_.k, train_y_.size());
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), c);
      std::vector<std::size_t> order(train_y_.size());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::VectorXd d = (train_x_.rowwise() - x.row(i)).rowwise().squaredNorm();
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t a, std::size_t b) {
                            const double da = d(static_cast<Eigen::Index>(a)), db = d(static_cast<Eigen::Index>(b));
                            return da < db || (da == db && a < b);
                          });
        for (std::size_t j = 0; j < k; ++j)
          p(i, static_cast<Eigen::Index>(class_index(classes_, train_y_[order[j]]))) += 1.0 / static_cast<double>(k);
      }
      return p;
    }
    case ClassifierKind::multinomial_logit:
      return softmax_rows(with_bias(x) * weights_);
  }
  throw std::logic_error("unknown classifier kind");
}

std::vector<int> Classifier::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd p = predict_proba(x);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    p.row(i).maxCoeff(&best);
    out.push_back(classes_[static_cast<std::size_t>(best)]);
  }
  return out;
}

Eigen::MatrixXd Classifier::embed(const Eigen::MatrixXd& x) const {
  if (spec_.kind == ClassifierKind::multinomial_logit) return with_bias(x) * weights_;
  return x;
}

double accuracy(const Classifier& model, const Eigen::MatrixXd& x, std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("accuracy: empty set");
  const auto pred = model.predict(x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

std::vector<ItemId> max_entropy_select(const Classifier& model, const Eigen::MatrixXd& x,
                                       std::span<const ItemId> unlabeled, std::size_t b) {
  if (b > unlabeled.size()) throw std::invalid_argument("max_entropy_select: b exceeds pool");
  std::vector<std::pair<double, ItemId>> scored;
  scored.reserve(unlabeled.size());
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(unlabeled.size()), x.cols());
  for (std::size_t i = 0; i < unlabeled.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(unlabeled[i].index));
  const Eigen::MatrixXd p = model.predict_proba(rows);
  for (std::size_t i = 0; i < unlabeled.size(); ++i)
    scored.emplace_back(entropy(p.row(static_cast<Eigen::Index>(i))), unlabeled[i]);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<ItemId> out;
  for (std::size_t i = 0; i < b; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<ItemId> k_center_select(const Eigen::MatrixXd& rows, std::span<const ItemId> labeled,
                                    std::span<const ItemId> unlabeled, std::size_t b) {
  if (b > unlabeled.size()) throw std::invalid_argument("k_center_select: b exceeds pool");
  std::vector<ItemId> pool(unlabeled.begin(), unlabeled.end());
  std::sort(pool.begin(), pool.end());
  std::vector<double> nearest(pool.size(), std::numeric_limits<double>::infinity());
  auto absorb = [&](ItemId center) {
    const auto c = rows.row(static_cast<Eigen::Index>(center.index));
    for (std::size_t i = 0; i < pool.size(); ++i)
      nearest[i] = std::min(nearest[i], (rows.row(static_cast<Eigen::Index>(pool[i].index)) - c).norm());
  };
  for (auto l : labeled) absorb(l);

  std::vector<ItemId> out;
  std::vector<bool> taken(pool.size(), false);
  for (std::size_t s = 0; s < b; ++s) {
    std::size_t best = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!taken[i] && (best == pool.size() || nearest[i] > nearest[best])) best = i;
    taken[best] = true;
    out.push_back(pool[best]);
    absorb(pool[best]);
  }
  return out;
}

double cover_radius(const Eigen::MatrixXd& rows, std::span<const ItemId> centers, std::span<const ItemId> items) {
  if (centers.empty()) return std::numeric_limits<double>::infinity();
  double radius = 0.0;
  for (auto i : items) {
    double best = std::numeric_limits<double>::infinity();
    for (auto c : centers)
      best = std::min(best, (rows.row(static_cast<Eigen::Index>(i.index)) - rows.row(static_cast<Eigen::Index>(c.index))).norm());
    radius = std::max(radius, best);
  }
  return radius;
}

std::vector<ItemId> balanced_initial_labels(std::span<const int> labels, std::size_t per_class, Rng& rng) {
  std::map<int, std::vector<ItemId>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].emplace_back(i);
  std::vector<ItemId> out;
  for (auto& [label, members] : by_class) {
    const std::size_t take = std::min(per_class, members.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
      out.push_back(members[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ALResult al_classification_loop(const ClassificationDataset& data, std::span<const ItemId> initial_labeled,
                                const ALConfig& cfg) {
  const auto n = static_cast<std::size_t>(data.train_x.rows());
  if (data.train_y.size() != n) throw std::invalid_argument("dataset: label count mismatch");
  if (data.test_y.size() != static_cast<std::size_t>(data.test_x.rows()))
    throw std::invalid_argument("dataset: test label count mismatch");

  std::vector<int> classes = data.train_y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<bool> is_labeled(n, false);
  for (auto i : initial_labeled) {
    if (i.index >= n) throw std::out_of_range("initial label out of range");
    is_labeled[i.index] = true;
  }

  Rng rng(derive_seed(cfg.seed, 0));
  ALResult result;

  auto labeled_items = [&] {
    std::vector<LabeledItem> out;
    for (std::size_t i = 0; i < n; ++i)
      if (is_labeled[i]) out.push_back({ItemId{i}, data.train_y[i]});
    return out;
  };
  auto unlabeled_items = [&] {
    std::vector<ItemId> out;
    for (std::size_t i = 0; i < n; ++i)
      if (!is_labeled[i]) out.emplace_back(i);
    return out;
  };
  auto train = [&](const std::vector<LabeledItem>& labeled) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(labeled.size()), data.train_x.cols());
    std::vector<int> y;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = data.train_x.row(static_cast<Eigen::Index>(labeled[i].item.index));
      y.push_back(labeled[i].label);
    }
    return Classifier::train(cfg.model, x, y, classes);
  };

  Classifier model = train(labeled_items());
  result.accuracy.push_back(accuracy(model, data.test_x, data.test_y));

  for (int k = 1; k <= cfg.cycles; ++k) {
    const auto labeled = labeled_items();
    const auto unlabeled = unlabeled_items();
    if (unlabeled.size() < cfg.batch) throw std::invalid_argument("fewer unlabeled items than the batch size");

    std::vector<ItemId> picks;
    switch (cfg.acquisition) {
      case Acquisition::random: {
        std::vector<ItemId> pool = unlabeled;
        for (std::size_t i = 0; i < cfg.batch; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
          std::swap(pool[i], pool[pick(rng)]);
          picks.push_back(pool[i]);
        }
        break;
      }
      case Acquisition::max_entropy:
        picks = max_entropy_select(model, data.train_x, unlabeled, cfg.batch);
        break;
      case Acquisition::k_center: {
        std::vector<ItemId> lab;
        for (const auto& l : labeled) lab.push_back(l.item);
        picks = k_center_select(model.embed(data.train_x), lab, unlabeled, cfg.batch);
        break;
      }
      case Acquisition::info_nn_m: {
        const Embedding z = model.embed(data.train_x);
        const DistanceStats stats = distance_stats(z);
        MIConfig mi{MIVariant::distances, stats.variance, cfg.n_samples, derive_seed(cfg.seed, 1000 + k)};
        Grouping grouping = KnnVoteGrouping{5};
        if (k <= cfg.kmeans_cycles) grouping = KMeansGrouping{classes.size(), derive_seed(cfg.seed, 2000 + k)};
        picks = info_nn_m(z, labeled, unlabeled, cfg.batch, cfg.query_length, mi, stats.max, grouping);
        break;
      }
    }
    for (auto p : picks) is_labeled[p.index] = true;
    result.acquired.push_back(std::move(picks));
    model = train(labeled_items());
    result.accuracy.push_back(accuracy(model, data.test_x, data.test_y));
  }
  result.labeled = labeled_items();
  return result;
}

}  // namespace infonn
