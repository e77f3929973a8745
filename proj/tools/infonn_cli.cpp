// infonn: experiment runner, timing bench, ingestion check and session server.

#include "infonn/experiment.hpp"
#include "infonn/ingest.hpp"
#include "infonn/server.hpp"
#include "infonn/timing.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace infonn;

namespace {

struct Common {
  std::optional<std::string> config_path;
  std::uint64_t seed = 0;
  int trials = 1;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config; flags override its values")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "base seed; trial t uses seed + t")->required();
  app->add_option("--trials", c.trials, "number of trials")->required()->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "result stream (JSON lines)")->required();
}

ExperimentConfig base_config(const Common& c, ExperimentKind kind) {
  ExperimentConfig cfg = c.config_path ? load_config(*c.config_path) : default_config(kind);
  if (c.config_path && cfg.kind != kind) {
    // the subcommand decides the protocol family, the file may pick a sibling kind
    const bool mds_family = kind == ExperimentKind::mds_synthetic || kind == ExperimentKind::mds_vs_ranking ||
                            kind == ExperimentKind::dml_pool;
    const bool file_mds = cfg.kind == ExperimentKind::mds_synthetic || cfg.kind == ExperimentKind::mds_vs_ranking ||
                          cfg.kind == ExperimentKind::dml_pool;
    if (!(mds_family && file_mds))
      throw std::invalid_argument("config file describes a '" + to_string(cfg.kind) + "' experiment");
  }
  cfg.base_seed = c.seed;
  cfg.trials = c.trials;
  return cfg;
}

template <typename T>
void set_if(const std::optional<T>& v, T& field) {
  if (v) field = *v;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& r, const std::string& out) {
  {
    std::ofstream series(out + ".series.tsv");
    if (!series) throw std::runtime_error("cannot write " + out + ".series.tsv");
    write_series(r, series);
  }
  {
    std::ofstream meta(out + ".meta.json");
    if (!meta) throw std::runtime_error("cannot write " + out + ".meta.json");
    meta << nlohmann::json{{"config", config_to_json(cfg)}, {"metadata", r.metadata}}.dump(2) << '\n';
  }
  std::ofstream wall(out + ".timing.jsonl");
  if (!wall) throw std::runtime_error("cannot write " + out + ".timing.jsonl");
  for (const auto& w : r.wall)
    wall << nlohmann::ordered_json{{"arm", w.arm}, {"trial", w.trial}, {"wall_seconds", w.seconds}}.dump() << '\n';
}

ExperimentResult run_to_file(const ExperimentConfig& cfg, const std::string& out) {
  std::ofstream stream(out);
  if (!stream) throw std::runtime_error("cannot write " + out);
  RecordWriter writer(stream);
  auto r = run_experiment(cfg, &writer);
  write_outputs(cfg, r, out);
  return r;
}

void print_finals(const ExperimentResult& r, const std::string& metric) {
  std::vector<std::string> arms;
  for (const auto& row : r.summary)
    if (row.metric == metric && std::find(arms.begin(), arms.end(), row.arm) == arms.end()) arms.push_back(row.arm);
  for (const auto& arm : arms) {
    const auto s = final_stats(r, arm, metric);
    std::cout << std::left << std::setw(16) << arm << metric << " median " << std::fixed << std::setprecision(4)
              << s.median << "  [q25 " << s.q25 << ", q75 " << s.q75 << "]\n";
  }
}

HttpService* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active similarity learning with mutual-information query selection"};
  app.require_subcommand(1);

  // simulate-mds
  Common mds_common;
  std::string protocol = "synthetic";
  std::optional<std::size_t> n_items, dim, query_length, candidate_cap, n_samples, train_pool, test_triplets,
      batch_size;
  std::optional<int> cycles, burn_in, batches;
  std::optional<double> corruption;
  std::optional<std::string> mi_variant, features;
  std::vector<std::string> arms;
  bool no_cap = false;
  auto* mds = app.add_subcommand("simulate-mds", "Active MDS on synthetic or Mahalanobis ground truth");
  add_common(mds, mds_common);
  mds->add_option("--protocol", protocol, "synthetic | ranking | mahalanobis")
      ->check(CLI::IsMember({"synthetic", "ranking", "mahalanobis"}));
  mds->add_option("--n-items", n_items, "N");
  mds->add_option("--dim", dim, "embedding dimension");
  mds->add_option("--cycles", cycles, "active queries (synthetic/ranking)");
  mds->add_option("--burn-in", burn_in, "random burn-in queries K_0");
  mds->add_option("--arms", arms, "e.g. info-nn-3 random-nn-5 random-rank-3 (synthetic/ranking)");
  mds->add_option("--candidate-cap", candidate_cap, "candidate queries per reference");
  mds->add_flag("--no-cap", no_cap, "enumerate every candidate query");
  mds->add_option("--n-samples", n_samples, "MI Monte Carlo samples");
  mds->add_option("--mi-variant", mi_variant, "embedding | distances")
      ->check(CLI::IsMember({"embedding", "distances"}));
  mds->add_option("--corruption", corruption, "fraction of corrupted answers");
  mds->add_option("--query-length", query_length, "C (mahalanobis)");
  mds->add_option("--train-pool", train_pool, "training pool size (mahalanobis)");
  mds->add_option("--test-triplets", test_triplets, "held-out triplets (mahalanobis)");
  mds->add_option("--batches", batches, "active batches (mahalanobis)");
  mds->add_option("--batch-size", batch_size, "B (mahalanobis)");
  mds->add_option("--features", features, "item feature table (mahalanobis)")->check(CLI::ExistingFile);

  // simulate-classify
  Common cls_common;
  std::optional<std::size_t> n_train, n_test, n_classes, cls_batch, initial_per_class, cls_length, cls_samples;
  std::optional<int> cls_cycles;
  std::optional<std::string> classifier, cls_features;
  std::vector<std::string> acquisitions;
  auto* cls = app.add_subcommand("simulate-classify", "Active classification on Gaussian blobs or a feature table");
  add_common(cls, cls_common);
  cls->add_option("--n-train", n_train);
  cls->add_option("--n-test", n_test);
  cls->add_option("--classes", n_classes);
  cls->add_option("--initial-per-class", initial_per_class);
  cls->add_option("--batch", cls_batch, "b");
  cls->add_option("--cycles", cls_cycles);
  cls->add_option("--query-length", cls_length, "m");
  cls->add_option("--n-samples", cls_samples);
  cls->add_option("--classifier", classifier, "nearest_centroid | knn | multinomial_logit");
  cls->add_option("--acquisitions", acquisitions, "info_nn_m random max_entropy k_center");
  cls->add_option("--features", cls_features, "labeled feature table")->check(CLI::ExistingFile);

  // bench-timing
  Common tim_common;
  std::optional<std::size_t> t_items, t_dim, t_reps, t_samples;
  std::vector<std::size_t> lengths;
  auto* tim = app.add_subcommand("bench-timing", "NN-MI vs ranking-MI scoring time per reference");
  add_common(tim, tim_common);
  tim->add_option("--n-items", t_items);
  tim->add_option("--dim", t_dim);
  tim->add_option("--lengths", lengths, "query lengths, each in 2..5");
  tim->add_option("--repetitions", t_reps);
  tim->add_option("--n-samples", t_samples);

  // ingest-check
  std::string ingest_features_path;
  std::optional<std::string> ingest_comparisons_path;
  auto* ing = app.add_subcommand("ingest-check", "Parse and validate a feature table and comparison corpus");
  ing->add_option("--features", ingest_features_path, "feature table")->required();
  ing->add_option("--comparisons", ingest_comparisons_path, "triplet / NN response corpus");

  // serve
  std::string host = "127.0.0.1", state_dir = "sessions";
  int port = 8080;
  auto* srv = app.add_subcommand("serve", "HTTP session API for a live human oracle");
  srv->add_option("--host", host);
  srv->add_option("--port", port);
  srv->add_option("--state-dir", state_dir, "session persistence directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mds) {
      const auto kind = protocol == "synthetic"  ? ExperimentKind::mds_synthetic
                        : protocol == "ranking" ? ExperimentKind::mds_vs_ranking
                                                : ExperimentKind::dml_pool;
      ExperimentConfig cfg = base_config(mds_common, kind);
      if (!mds_common.config_path) cfg.kind = kind;
      if (cfg.kind == ExperimentKind::dml_pool) {
        auto& p = cfg.pool;
        set_if(n_items, p.n_items);
        set_if(dim, p.dim);
        set_if(query_length, p.query_length);
        set_if(train_pool, p.train_pool);
        set_if(test_triplets, p.test_triplets);
        set_if(corruption, p.corruption);
        set_if(burn_in, p.burn_in);
        set_if(batches, p.batches);
        set_if(n_samples, p.mi.n_samples);
        if (mi_variant) p.mi.variant = mi_variant_from_string(*mi_variant);
        if (batch_size) {
          p.batch_size = *batch_size;
          for (auto& a : p.arms)
            if (a.top_count > 0) a.top_count = *batch_size;
        }
        if (features) p.features_path = *features;
      } else {
        auto& m = cfg.mds;
        set_if(n_items, m.n_items);
        set_if(dim, m.dim);
        set_if(cycles, m.cycles);
        set_if(burn_in, m.burn_in);
        set_if(n_samples, m.mi.n_samples);
        set_if(corruption, m.oracle.corruption);
        if (mi_variant) m.mi.variant = mi_variant_from_string(*mi_variant);
        if (candidate_cap) m.candidate_cap = *candidate_cap;
        if (no_cap) m.candidate_cap.reset();
        if (!arms.empty()) {
          m.arms.clear();
          for (const auto& a : arms) m.arms.push_back(parse_arm(a));
        }
      }
      validate_config(cfg);
      const auto r = run_to_file(cfg, mds_common.out);
      print_finals(r, cfg.kind == ExperimentKind::dml_pool ? "tga" : "kendall_tau");
    } else if (*cls) {
      ExperimentConfig cfg = base_config(cls_common, ExperimentKind::classification);
      auto& c = cfg.classification;
      set_if(n_train, c.n_train);
      set_if(n_test, c.n_test);
      set_if(n_classes, c.n_classes);
      set_if(initial_per_class, c.initial_per_class);
      set_if(cls_batch, c.al.batch);
      set_if(cls_cycles, c.al.cycles);
      set_if(cls_length, c.al.query_length);
      set_if(cls_samples, c.al.n_samples);
      if (classifier) c.al.model.kind = classifier_kind_from_string(*classifier);
      if (!acquisitions.empty()) {
        c.acquisitions.clear();
        for (const auto& a : acquisitions) c.acquisitions.push_back(acquisition_from_string(a));
      }
      if (cls_features) c.features_path = *cls_features;
      validate_config(cfg);
      const auto r = run_to_file(cfg, cls_common.out);
      print_finals(r, "accuracy");
    } else if (*tim) {
      ExperimentConfig cfg = base_config(tim_common, ExperimentKind::timing_bench);
      auto& t = cfg.timing;
      set_if(t_items, t.n_items);
      set_if(t_dim, t.dim);
      set_if(t_reps, t.repetitions);
      set_if(t_samples, t.mi.n_samples);
      if (!lengths.empty()) t.lengths = lengths;
      validate_config(cfg);
      const auto r = run_to_file(cfg, tim_common.out);
      std::cout << "trial  K   nn mean (s)   nn std      rank mean (s) rank std    ratio\n";
      for (const auto& row : r.metadata.at("timing")) {
        std::cout << std::setw(5) << row.at("trial").get<int>() << "  " << std::setw(2)
                  << row.at("length").get<std::size_t>() << std::scientific << std::setprecision(3) << "  "
                  << std::setw(12) << row.at("nn_mean_seconds").get<double>() << "  " << std::setw(10)
                  << row.at("nn_std_seconds").get<double>() << "  " << std::setw(12)
                  << row.at("ranking_mean_seconds").get<double>() << "  " << std::setw(10)
                  << row.at("ranking_std_seconds").get<double>() << "  " << std::fixed << std::setprecision(1)
                  << row.at("ratio").get<double>() << '\n';
      }
      std::ofstream table(tim_common.out + ".table.json");
      table << r.metadata.at("timing").dump(2) << '\n';
    } else if (*ing) {
      const auto table = ingest_features(ingest_features_path);
      std::cout << ingest_features_path << ": " << table.size() << " items x " << table.features.cols()
                << " features";
      if (table.labels) {
        const auto codes = table.label_codes();
        std::cout << ", " << std::set<int>(codes.begin(), codes.end()).size() << " classes";
      }
      std::cout << '\n';
      if (ingest_comparisons_path) {
        const auto corpus = ingest_comparisons(*ingest_comparisons_path, table);
        std::cout << *ingest_comparisons_path << ": " << corpus.triplets.size() << " triplets, "
                  << corpus.nn_responses.size() << " NN responses, " << corpus.all_comparisons().size()
                  << " paired comparisons\n";
      }
    } else if (*srv) {
      SessionManager sessions{std::filesystem::path(state_dir)};
      HttpService service(sessions);
      const int bound = service.bind(host, port);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving on http://" << host << ':' << bound << " (state in " << state_dir << ")" << std::endl;
      service.run();
      g_service = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << "infonn: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
