#include "infonn/experiment.hpp"
#include "infonn/timing.hpp"

#include "test_support.hpp"

#include <sstream>

using namespace infonn;

namespace {

ExperimentConfig tiny(ExperimentKind kind, int trials) {
  auto cfg = default_config(kind);
  cfg.trials = trials;
  cfg.base_seed = 5;
  cfg.mds.n_items = 8;
  cfg.mds.burn_in = 6;
  cfg.mds.cycles = 3;
  cfg.mds.mi.n_samples = 20;
  cfg.mds.mds.iterations = 40;
  if (kind == ExperimentKind::mds_synthetic) cfg.mds.oracle.corruption = 0.1;
  cfg.pool.n_items = 15;
  cfg.pool.dim = 3;
  cfg.pool.train_pool = 200;
  cfg.pool.test_triplets = 200;
  cfg.pool.burn_in = 10;
  cfg.pool.batches = 3;
  cfg.pool.batch_size = 5;
  cfg.pool.arms = {{"info-nn", 5}, {"random-nn", 0}};
  cfg.pool.mi.n_samples = 20;
  cfg.pool.mds.iterations = 40;
  cfg.classification.n_train = 60;
  cfg.classification.n_test = 60;
  cfg.classification.initial_per_class = 2;
  cfg.classification.al.batch = 4;
  cfg.classification.al.cycles = 2;
  cfg.classification.al.n_samples = 50;
  cfg.timing.n_items = 7;
  cfg.timing.repetitions = 2;
  cfg.timing.mi.n_samples = 20;
  return cfg;
}

std::string stream_of(const ExperimentConfig& cfg) {
  std::ostringstream os;
  RecordWriter w(os);
  run_experiment(cfg, &w);
  return os.str();
}

}  // namespace

TEST_CASE("identical configs give byte-identical streams") {
  for (auto kind : {ExperimentKind::mds_synthetic, ExperimentKind::mds_vs_ranking, ExperimentKind::dml_pool,
                    ExperimentKind::classification, ExperimentKind::timing_bench}) {
    CAPTURE(to_string(kind));
    const auto cfg = tiny(kind, 2);
    const std::string a = stream_of(cfg);
    CHECK_FALSE(a.empty());
    CHECK(a == stream_of(cfg));
    auto other = cfg;
    other.base_seed = 6;
    if (kind != ExperimentKind::timing_bench) CHECK(a != stream_of(other));
  }
}

TEST_CASE("records come in trial, arm, cycle order with summaries last") {
  const auto cfg = tiny(ExperimentKind::mds_synthetic, 2);
  const auto r = run_experiment(cfg);
  REQUIRE_FALSE(r.records.empty());
  CHECK(r.records.front().trial == 0);
  CHECK(r.records.back().trial == 1);
  for (std::size_t i = 1; i < r.records.size(); ++i) CHECK(r.records[i].trial >= r.records[i - 1].trial);
  // 3 arms x (post burn-in + 3 cycles) x 3 metrics x 2 trials
  CHECK(r.records.size() == 3 * 4 * 3 * 2);
  CHECK(r.wall.size() == 6);

  std::ostringstream os;
  RecordWriter w(os);
  run_experiment(cfg, &w);
  CHECK(w.count() == r.records.size() + 3 * r.summary.size());

  std::ostringstream series;
  write_series(r, series);
  CHECK(series.str().rfind("arm\tcycle\tqueries\ttriplets\tmetric\tmedian\tq25\tq75\n", 0) == 0);
  CHECK(series.str().find("random-nn-5\t3\t9\t36\tkendall_tau") != std::string::npos);
}

TEST_CASE("a single trial has equal quartiles") {
  for (auto kind : {ExperimentKind::mds_synthetic, ExperimentKind::classification}) {
    const auto r = run_experiment(tiny(kind, 1));
    for (const auto& row : r.summary) {
      CHECK(row.stats.q25 == row.stats.median);
      CHECK(row.stats.q75 == row.stats.median);
    }
  }
  const auto r = run_experiment(tiny(ExperimentKind::mds_synthetic, 1));
  double last = 0.0;
  for (const auto& rec : r.records)
    if (rec.arm == "info-nn-3" && rec.metric == "kendall_tau") last = rec.value;
  CHECK(final_stats(r, "info-nn-3", "kendall_tau").median == last);
  CHECK_THROWS(final_stats(r, "nope", "kendall_tau"));
}

TEST_CASE("pool and classification metadata and arms") {
  const auto pool = run_experiment(tiny(ExperimentKind::dml_pool, 1));
  CHECK(pool.metadata.at("learner") == "probabilistic MDS");
  CHECK(final_stats(pool, "info-nn", "queries").median == 25.0);
  const auto cls = run_experiment(tiny(ExperimentKind::classification, 1));
  for (const char* arm : {"info_nn_m", "random", "max_entropy", "k_center"})
    CHECK(final_stats(cls, arm, "labeled").median == 8.0 + 2 * 4);
  CHECK_THROWS(run_experiment(default_config(ExperimentKind::serve)));
}

TEST_CASE("timing bench") {
  TimingConfig t;
  t.n_items = 7;
  t.repetitions = 1;
  t.mi.n_samples = 20;
  const auto rows = timing_bench(t, 3);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(row.nn_std == 0.0);
    CHECK(row.rank_std == 0.0);
    CHECK(row.nn_mean > 0.0);
    CHECK(row.rank_mean > 0.0);
  }
  // At K = 2 both estimators see the same samples and outcomes.
  CHECK(rows[0].nn_checksum == doctest::Approx(rows[0].rank_checksum).epsilon(1e-9));
  t.repetitions = 3;
  CHECK(timing_bench(t, 3)[1].nn_checksum == timing_bench(t, 3)[1].nn_checksum);
}
