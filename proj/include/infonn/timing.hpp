#pragma once

#include "infonn/config.hpp"

namespace infonn {

struct TimingRow {
  std::size_t length = 0;
  double nn_mean = 0.0;  // seconds
  double nn_std = 0.0;
  double rank_mean = 0.0;
  double rank_std = 0.0;
  double nn_checksum = 0.0;  // sum of scores, independent of the clock
  double rank_checksum = 0.0;

  double ratio() const { return rank_mean / nn_mean; }
};

/// Per repetition: a fresh standard normal embedding and one reference item;
/// score all of that reference's candidate queries with NN MI and with
/// ranking MI. Mean and sample standard deviation over repetitions.
std::vector<TimingRow> timing_bench(const TimingConfig& cfg, std::uint64_t seed);

}  // namespace infonn
