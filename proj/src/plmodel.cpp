#include "infonn/plmodel.hpp"

namespace infonn {

void validate_pl_params(const PLParams& params) {
  if (!(params.mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
  if (!(params.rate > 0.0 && params.rate < 1.0)) throw std::invalid_argument("mu decay rate must lie in (0,1)");
}

double mu_value(const PLParams& params, int cycle, std::optional<double> d_max) {
  validate_pl_params(params);
  if (cycle < 0) throw std::invalid_argument("cycle must be nonnegative");
  switch (params.schedule) {
    case MuSchedule::constant:
      return params.mu;
    case MuSchedule::diminishing:
      if (!d_max) throw std::invalid_argument("diminishing mu schedule needs D_max");
      if (*d_max < 0.0) throw std::invalid_argument("D_max must be nonnegative");
      return *d_max * std::pow(params.rate, cycle);
    case MuSchedule::max_distance:
      if (!d_max) throw std::invalid_argument("max_distance mu schedule needs D_max");
      if (*d_max < 0.0) throw std::invalid_argument("D_max must be nonnegative");
      return *d_max;
  }
  throw std::logic_error("unknown mu schedule");
}

}  // namespace infonn
