#pragma once

#include "infonn/core.hpp"
#include "infonn/plmodel.hpp"

#include <cmath>

namespace infonn {

/// Append-only store of paired comparisons. Duplicates are legal.
class ComparisonStore {
 public:
  void append(const PairedComparison& c) { items_.push_back(c); }
  void append(std::span<const PairedComparison> cs) { items_.insert(items_.end(), cs.begin(), cs.end()); }

  const std::vector<PairedComparison>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

 private:
  std::vector<PairedComparison> items_;
};

/// Mean negative log-likelihood of the comparisons under the two-candidate PL
/// model on squared Euclidean distances:
///   -ln P = ln(u + v) - ln v,  u = d(r,w)^2 + mu,  v = d(r,l)^2 + mu.
template <typename Derived>
typename Derived::Scalar pair_log_loss(const Eigen::MatrixBase<Derived>& z, std::span<const PairedComparison> s,
                                       typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  if (s.empty()) throw std::invalid_argument("pair_log_loss: empty comparison set");
  Scalar total(0);
  for (const auto& c : s) {
    const auto r = static_cast<Eigen::Index>(c.reference.index);
    const Scalar u = (z.row(r) - z.row(static_cast<Eigen::Index>(c.winner.index))).squaredNorm() + mu;
    const Scalar v = (z.row(r) - z.row(static_cast<Eigen::Index>(c.loser.index))).squaredNorm() + mu;
    total += std::log(u + v) - std::log(v);
  }
  return total / static_cast<Scalar>(s.size());
}

/// Analytic gradient of pair_log_loss with respect to every coordinate.
Embedding pair_log_loss_grad(const Embedding& z, std::span<const PairedComparison> s, double mu);

/// Loss and gradient in one pass.
double pair_log_loss_with_grad(const Embedding& z, std::span<const PairedComparison> s, double mu, Embedding& grad);

enum class MDSInit { uniform01, warm_start };

struct MDSConfig {
  double step_size = 0.5;  // alpha
  int iterations = 500;    // K_MDS
  PLParams mu_schedule{1.0, MuSchedule::diminishing, 0.99};
  MDSInit init = MDSInit::uniform01;
};

void validate_mds_config(const MDSConfig& cfg);

struct FitReport {
  double mu = 0.0;
  double loss_before = 0.0;
  double loss_after = 0.0;
  int step_halvings = 0;  // rejected steps; each halves alpha for the rest of the fit
  double final_step = 0.0;
};

/// Entries uniform on [0, 1).
Embedding uniform_init(std::size_t n_items, std::size_t dim, Rng& rng);

/// Exactly cfg.iterations gradient steps Z <- Z - alpha * grad, with mu taken
/// from the schedule at `cycle` and D_max of the input embedding. A step that
/// would raise the loss is rejected and alpha halved, so the output loss never
/// exceeds the input loss. Throws std::runtime_error on a non-finite starting loss.
Embedding mds_fit(const Embedding& z0, const ComparisonStore& s, const MDSConfig& cfg, int cycle,
                  FitReport* report = nullptr);

}  // namespace infonn
