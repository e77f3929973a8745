#include "infonn/mds.hpp"

namespace infonn {

double pair_log_loss_with_grad(const Embedding& z, std::span<const PairedComparison> s, double mu, Embedding& grad) {
  if (s.empty()) throw std::invalid_argument("pair_log_loss: empty comparison set");
  grad.setZero(z.rows(), z.cols());
  const double scale = 1.0 / static_cast<double>(s.size());
  double total = 0.0;
  for (const auto& c : s) {
    const auto r = static_cast<Eigen::Index>(c.reference.index);
    const auto w = static_cast<Eigen::Index>(c.winner.index);
    const auto l = static_cast<Eigen::Index>(c.loser.index);
    const Eigen::RowVectorXd dw = z.row(r) - z.row(w);
    const Eigen::RowVectorXd dl = z.row(r) - z.row(l);
    const double u = dw.squaredNorm() + mu;
    const double v = dl.squaredNorm() + mu;
    total += std::log(u + v) - std::log(v);
    // d/du = 1/(u+v), d/dv = 1/(u+v) - 1/v; du/dz_r = 2 dw, dv/dz_r = 2 dl.
    const double gu = 2.0 * scale / (u + v);
    const double gv = 2.0 * scale * (1.0 / (u + v) - 1.0 / v);
    grad.row(r) += gu * dw + gv * dl;
    grad.row(w) -= gu * dw;
    grad.row(l) -= gv * dl;
  }
  return total * scale;
}

Embedding pair_log_loss_grad(const Embedding& z, std::span<const PairedComparison> s, double mu) {
  Embedding grad;
  pair_log_loss_with_grad(z, s, mu, grad);
  return grad;
}

void validate_mds_config(const MDSConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("MDS step size must be positive");
  if (cfg.iterations < 1) throw std::invalid_argument("MDS iterations must be at least 1");
  validate_pl_params(cfg.mu_schedule);
}

Embedding uniform_init(std::size_t n_items, std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Embedding z(static_cast<Eigen::Index>(n_items), static_cast<Eigen::Index>(dim));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = u(rng);
  return z;
}

Embedding mds_fit(const Embedding& z0, const ComparisonStore& s, const MDSConfig& cfg, int cycle, FitReport* report) {
  validate_mds_config(cfg);
  if (s.empty()) throw std::invalid_argument("mds_fit: empty comparison set");
  for (const auto& c : s.items())
    if (std::max({c.reference.index, c.winner.index, c.loser.index}) >= static_cast<std::size_t>(z0.rows()))
      throw std::out_of_range("mds_fit: comparison references an item outside the embedding");

  const double mu = mu_value(cfg.mu_schedule, cycle, distance_stats(z0).max);
  const auto& items = s.items();

  Embedding z = z0;
  Embedding grad, cand_grad;
  double loss = pair_log_loss_with_grad(z, items, mu, grad);
  if (!std::isfinite(loss)) throw std::runtime_error("mds_fit: non-finite loss");
  const double loss_before = loss;

  double alpha = cfg.step_size;
  int halvings = 0;
  for (int it = 0; it < cfg.iterations; ++it) {
    Embedding cand = z - alpha * grad;
    const double cand_loss = pair_log_loss_with_grad(cand, items, mu, cand_grad);
    if (!(cand_loss <= loss)) {
      alpha *= 0.5;
      ++halvings;
      continue;
    }
    z.swap(cand);
    grad.swap(cand_grad);
    loss = cand_loss;
  }

  if (report) *report = {mu, loss_before, loss, halvings, alpha};
  return z;
}

}  // namespace infonn
