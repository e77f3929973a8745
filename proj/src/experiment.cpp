#include "infonn/experiment.hpp"

#include "infonn/ingest.hpp"
#include "infonn/synthetic.hpp"
#include "infonn/timing.hpp"

#include <chrono>
#include <map>
#include <ostream>
#include <tuple>

namespace infonn {

namespace {

using Clock = std::chrono::steady_clock;

// Stream ids for derive_seed within one trial.
enum Stream : std::uint64_t { kTruth = 1, kOracleAnswers = 2, kScoring = 3, kCorruption = 4, kPool = 5, kTest = 6 };

class Emitter {
 public:
  Emitter(ExperimentResult& result, RecordWriter* out) : result_(result), out_(out) {}

  void emit(const std::string& arm, int trial, int cycle, const std::string& metric, double value) {
    ResultRecord r{arm, trial, cycle, metric, value};
    if (out_) out_->write(r);
    result_.records.push_back(std::move(r));
  }

  void stream_only(const std::string& arm, int trial, int cycle, const std::string& metric, double value) {
    if (out_) out_->write({arm, trial, cycle, metric, value});
  }

 private:
  ExperimentResult& result_;
  RecordWriter* out_;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::unique_ptr<Oracle> make_oracle(const OracleSpec& spec, const GroundTruth& truth, std::uint64_t seed) {
  std::unique_ptr<Oracle> o;
  if (spec.kind == OracleSpec::Kind::pl_noisy) {
    o = std::make_unique<PLNoisyOracle>(truth, spec.mu);
  } else {
    o = std::make_unique<DeterministicOracle>(truth);
  }
  if (spec.corruption > 0.0) o = std::make_unique<CorruptedOracle>(std::move(o), spec.corruption, seed);
  return o;
}

std::size_t comparisons_per_query(QueryFamily family, std::size_t c) {
  return family == QueryFamily::ranking ? c * (c - 1) / 2 : c - 1;
}

void run_mds(const ExperimentConfig& cfg, Emitter& emit, ExperimentResult& result) {
  const auto& m = cfg.mds;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    Rng truth_rng(derive_seed(seed, kTruth));
    const Embedding truth_z = standard_normal_matrix(m.n_items, m.dim, truth_rng);
    const GroundTruth truth = GroundTruth::from_embedding(truth_z);

    for (const auto& arm : m.arms) {
      const auto t0 = Clock::now();
      ActiveLoopConfig a;
      a.n_items = m.n_items;
      a.dim = m.dim;
      a.query_length = arm.query_length;
      a.cycles = m.cycles;
      a.burn_in = m.burn_in;
      a.candidate_cap = m.candidate_cap;
      a.family = arm.family;
      a.selection = arm.selection;
      a.mi = m.mi;
      a.mi.seed = derive_seed(seed, kScoring);
      a.sigma_mode = m.sigma_mode;
      a.mds = m.mds;
      a.seed = seed;

      auto oracle = make_oracle(m.oracle, truth, derive_seed(seed, kCorruption));
      Rng oracle_rng(derive_seed(seed, kOracleAnswers));
      const auto traj = active_embed_loop(a, *oracle, oracle_rng, [&](const Embedding& z) {
        return std::map<std::string, double>{{"kendall_tau", aggregate_kendall(z, truth_z)}};
      });

      const auto per_query = comparisons_per_query(arm.family, arm.query_length);
      for (const auto& p : traj.points) {
        const auto queries = static_cast<std::size_t>(m.burn_in + p.cycle);
        emit.emit(arm.name, t, p.cycle, "kendall_tau", p.metrics.at("kendall_tau"));
        emit.emit(arm.name, t, p.cycle, "queries", static_cast<double>(queries));
        emit.emit(arm.name, t, p.cycle, "triplets", static_cast<double>(queries * per_query));
      }
      result.wall.push_back({arm.name, t, seconds_since(t0)});
    }
  }
}

void run_pool(const ExperimentConfig& cfg, Emitter& emit, ExperimentResult& result) {
  const auto& p = cfg.pool;
  std::optional<FeatureTable> table;
  if (p.features_path) table = ingest_features(*p.features_path);
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    Rng truth_rng(derive_seed(seed, kTruth));
    Eigen::MatrixXd features = table ? table->features : standard_normal_matrix(p.n_items, p.dim, truth_rng);
    const auto n_items = static_cast<std::size_t>(features.rows());
    const auto dim = static_cast<std::size_t>(features.cols());
    const GroundTruth truth = GroundTruth::mahalanobis(std::move(features), random_mahalanobis_metric(dim, truth_rng));

    Rng pool_rng(derive_seed(seed, kPool));
    const QueryPool pool = random_query_pool(n_items, p.query_length, p.train_pool, pool_rng);
    Rng test_rng(derive_seed(seed, kTest));
    const auto test = truth_triplets(truth, p.test_triplets, test_rng);

    for (const auto& arm : p.arms) {
      const auto t0 = Clock::now();
      PoolLoopConfig lc;
      lc.dim = p.dim;
      lc.burn_in = p.burn_in;
      lc.batches = p.batches;
      lc.batch = {p.batch_size, arm.top_count};
      lc.mi = p.mi;
      lc.mi.seed = derive_seed(seed, kScoring);
      lc.mi_mu = p.mi_mu;
      lc.mds = p.mds;
      lc.seed = seed;

      OracleSpec spec;
      spec.corruption = p.corruption;
      auto oracle = make_oracle(spec, truth, derive_seed(seed, kCorruption));
      Rng oracle_rng(derive_seed(seed, kOracleAnswers));
      const auto points = pool_batch_loop(n_items, pool, lc, *oracle, oracle_rng, [&](const Embedding& z) {
        return std::map<std::string, double>{{"tga", triplet_generalization_accuracy(z, test)}};
      });
      for (const auto& pt : points) {
        emit.emit(arm.name, t, pt.batch, "tga", pt.metrics.at("tga"));
        emit.emit(arm.name, t, pt.batch, "queries", static_cast<double>(pt.queries));
        emit.emit(arm.name, t, pt.batch, "triplets", static_cast<double>(pt.comparisons));
      }
      result.wall.push_back({arm.name, t, seconds_since(t0)});
    }
  }
}

ClassificationDataset split_table(const FeatureTable& table) {
  const auto codes = table.label_codes();
  ClassificationDataset d;
  const auto n = static_cast<Eigen::Index>(table.size());
  const Eigen::Index n_train = (n + 1) / 2;
  d.train_x.resize(n_train, table.features.cols());
  d.test_x.resize(n - n_train, table.features.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      d.train_x.row(i / 2) = table.features.row(i);
      d.train_y.push_back(codes[static_cast<std::size_t>(i)]);
    } else {
      d.test_x.row(i / 2) = table.features.row(i);
      d.test_y.push_back(codes[static_cast<std::size_t>(i)]);
    }
  }
  return d;
}

void run_classification(const ExperimentConfig& cfg, Emitter& emit, ExperimentResult& result) {
  const auto& c = cfg.classification;
  std::optional<ClassificationDataset> fixed;
  if (c.features_path) fixed = split_table(ingest_features(*c.features_path));
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    Rng data_rng(derive_seed(seed, kTruth));
    const ClassificationDataset data =
        fixed ? *fixed : gaussian_blobs(c.n_train, c.n_test, c.n_classes, c.blob_std, c.blob_radius, data_rng);
    Rng init_rng(derive_seed(seed, kPool));
    const auto initial = balanced_initial_labels(data.train_y, c.initial_per_class, init_rng);

    for (auto acq : c.acquisitions) {
      const auto t0 = Clock::now();
      ALConfig al = c.al;
      al.acquisition = acq;
      al.seed = seed;
      const auto r = al_classification_loop(data, initial, al);
      const std::string arm = to_string(acq);
      for (std::size_t k = 0; k < r.accuracy.size(); ++k) {
        const int cycle = static_cast<int>(k);
        emit.emit(arm, t, cycle, "accuracy", r.accuracy[k]);
        emit.emit(arm, t, cycle, "labeled", static_cast<double>(initial.size() + k * al.batch));
      }
      result.wall.push_back({arm, t, seconds_since(t0)});
    }
  }
}

void run_timing(const ExperimentConfig& cfg, Emitter& emit, ExperimentResult& result) {
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    const auto t0 = Clock::now();
    const auto rows = timing_bench(cfg.timing, seed);
    for (const auto& row : rows) {
      const int k = static_cast<int>(row.length);
      emit.emit("nn", t, k, "score_checksum", row.nn_checksum);
      emit.emit("ranking", t, k, "score_checksum", row.rank_checksum);
      result.metadata["timing"].push_back({{"trial", t},
                                           {"length", row.length},
                                           {"nn_mean_seconds", row.nn_mean},
                                           {"nn_std_seconds", row.nn_std},
                                           {"ranking_mean_seconds", row.rank_mean},
                                           {"ranking_std_seconds", row.rank_std},
                                           {"ratio", row.ratio()}});
    }
    result.wall.push_back({"timing", t, seconds_since(t0)});
  }
}

void summarize_records(ExperimentResult& result, Emitter& emit) {
  // Arms keep their first-seen order; cycles and metrics sort naturally.
  std::vector<std::string> arm_order;
  std::map<std::tuple<std::string, int, std::string>, std::vector<double>> groups;
  for (const auto& r : result.records) {
    if (std::find(arm_order.begin(), arm_order.end(), r.arm) == arm_order.end()) arm_order.push_back(r.arm);
    groups[{r.arm, r.cycle, r.metric}].push_back(r.value);
  }
  for (const auto& arm : arm_order) {
    for (const auto& [key, values] : groups) {
      if (std::get<0>(key) != arm) continue;
      const TrialStats s = summarize(values);
      const int cycle = std::get<1>(key);
      const std::string& metric = std::get<2>(key);
      result.summary.push_back({arm, cycle, metric, s});
      emit.stream_only(arm, -1, cycle, metric + ".median", s.median);
      emit.stream_only(arm, -1, cycle, metric + ".q25", s.q25);
      emit.stream_only(arm, -1, cycle, metric + ".q75", s.q75);
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, RecordWriter* out) {
  validate_config(cfg);
  ExperimentResult result;
  result.metadata = {{"experiment", to_string(cfg.kind)}, {"trials", cfg.trials}, {"base_seed", cfg.base_seed}};
  Emitter emit(result, out);
  switch (cfg.kind) {
    case ExperimentKind::mds_synthetic:
    case ExperimentKind::mds_vs_ranking:
      run_mds(cfg, emit, result);
      break;
    case ExperimentKind::dml_pool:
      result.metadata["learner"] = "probabilistic MDS";
      result.metadata["note"] = "desk-scale substitution: MDS replaces the neural-network metric learner";
      run_pool(cfg, emit, result);
      break;
    case ExperimentKind::classification:
      result.metadata["learner"] = to_string(cfg.classification.al.model.kind);
      result.metadata["note"] = "desk-scale substitution: lightweight classifier on fixed features";
      run_classification(cfg, emit, result);
      break;
    case ExperimentKind::timing_bench:
      run_timing(cfg, emit, result);
      break;
    case ExperimentKind::serve:
      throw std::invalid_argument("serve is not a batch experiment");
  }
  summarize_records(result, emit);
  return result;
}

TrialStats final_stats(const ExperimentResult& r, const std::string& arm, const std::string& metric) {
  const SummaryRow* last = nullptr;
  for (const auto& row : r.summary)
    if (row.arm == arm && row.metric == metric && (!last || row.cycle > last->cycle)) last = &row;
  if (!last) throw std::out_of_range("no summary for arm '" + arm + "', metric '" + metric + "'");
  return last->stats;
}

void write_series(const ExperimentResult& r, std::ostream& out) {
  std::map<std::pair<std::string, int>, std::pair<double, double>> budget;
  for (const auto& row : r.summary) {
    if (row.metric == "queries" || row.metric == "labeled") budget[{row.arm, row.cycle}].first = row.stats.median;
    if (row.metric == "triplets") budget[{row.arm, row.cycle}].second = row.stats.median;
  }
  out << "arm\tcycle\tqueries\ttriplets\tmetric\tmedian\tq25\tq75\n";
  for (const auto& row : r.summary) {
    if (row.metric == "queries" || row.metric == "triplets" || row.metric == "labeled") continue;
    const auto it = budget.find({row.arm, row.cycle});
    const auto [q, tr] = it == budget.end() ? std::pair{0.0, 0.0} : it->second;
    out << row.arm << '\t' << row.cycle << '\t' << q << '\t' << tr << '\t' << row.metric << '\t' << row.stats.median
        << '\t' << row.stats.q25 << '\t' << row.stats.q75 << '\n';
  }
}

}  // namespace infonn
