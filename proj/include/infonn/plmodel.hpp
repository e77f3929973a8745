#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace infonn {

/// How the PL margin mu evolves over active-learning cycles.
enum class MuSchedule {
  constant,      ///< mu stays at PLParams::mu
  diminishing,   ///< D_max * rate^k
  max_distance,  ///< D_max
};

struct PLParams {
  double mu = 1e-5;  // squared-distance units
  MuSchedule schedule = MuSchedule::constant;
  double rate = 0.99;
};

using ProbabilityVector = Eigen::VectorXd;

/// Plackett-Luce choice probabilities for an NN query:
///   p_c = (d_c^2 + mu)^-1 / sum_j (d_j^2 + mu)^-1.
/// With mu == 0 and k exact zero distances, each zero-distance candidate gets 1/k.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> choice_probabilities(
    const Eigen::MatrixBase<Derived>& distances, typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index c = distances.size();
  if (c < 2) throw std::invalid_argument("choice_probabilities: need at least 2 candidates");
  if (mu < Scalar(0)) throw std::invalid_argument("choice_probabilities: mu must be nonnegative");
  if ((distances.array() < Scalar(0)).any())
    throw std::invalid_argument("choice_probabilities: negative distance");

  Vec p(c);
  if (mu == Scalar(0)) {
    const auto zeros = (distances.array() == Scalar(0)).count();
    if (zeros > 0) {
      for (Eigen::Index i = 0; i < c; ++i)
        p(i) = distances(i) == Scalar(0) ? Scalar(1) / Scalar(zeros) : Scalar(0);
      return p;
    }
  }
  p = (distances.array().square() + mu).inverse().matrix();
  return p / p.sum();
}

/// Shannon entropy in nats, with 0 ln 0 = 0.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar h(0);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > Scalar(0)) h -= p(i) * std::log(p(i));
  return h;
}

/// mu for active-learning cycle k. Schedules other than `constant` need d_max.
double mu_value(const PLParams& params, int cycle, std::optional<double> d_max);

void validate_pl_params(const PLParams& params);

}  // namespace infonn
