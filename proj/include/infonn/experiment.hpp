#pragma once

#include "infonn/config.hpp"
#include "infonn/metrics.hpp"
#include "infonn/records.hpp"

#include <iosfwd>

namespace infonn {

/// Median and quartiles of one metric at one cycle, across trials.
struct SummaryRow {
  std::string arm;
  int cycle = 0;
  std::string metric;
  TrialStats stats;
};

struct WallTime {
  std::string arm;
  int trial = 0;
  double seconds = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRecord> records;
  std::vector<SummaryRow> summary;
  std::vector<WallTime> wall;  // kept out of the record stream so it stays reproducible
  nlohmann::json metadata;
};

/// Runs every trial (seed base_seed + t) and arm of the configured
/// experiment. Records are written to `out` as they are produced, followed by
/// the summary rows encoded as records with trial = -1 and metric names
/// "<metric>.median", "<metric>.q25", "<metric>.q75".
ExperimentResult run_experiment(const ExperimentConfig& cfg, RecordWriter* out = nullptr);

/// Summary statistics for the last cycle of `metric` in `arm`.
TrialStats final_stats(const ExperimentResult& r, const std::string& arm, const std::string& metric);

/// Plot-ready tab-separated table: arm, cycle, queries, triplets, metric,
/// median, q25, q75. The budget columns allow both per-query and per-triplet x-axes.
void write_series(const ExperimentResult& r, std::ostream& out);

}  // namespace infonn
