#pragma once

#include "infonn/active_embed.hpp"
#include "infonn/classify.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace infonn {

enum class ExperimentKind { mds_synthetic, mds_vs_ranking, dml_pool, classification, timing_bench, serve };

/// Simulated answer source for the embedding experiments.
struct OracleSpec {
  enum class Kind { deterministic, pl_noisy } kind = Kind::deterministic;
  double mu = 0.0;          // pl_noisy only
  double corruption = 0.0;  // fraction of answers replaced by a random loser
};

/// One competing method in an MDS experiment, e.g. "info-nn-3", "random-rank-3".
struct MdsArm {
  std::string name;
  QueryFamily family = QueryFamily::nearest_neighbor;
  SelectionRule selection = SelectionRule::info_nn;
  std::size_t query_length = 3;
};

/// Parses "<info|random>-<nn|rank>-<C>".
MdsArm parse_arm(const std::string& name);

struct MdsExperimentConfig {
  std::size_t n_items = 20;
  std::size_t dim = 2;
  int burn_in = 20;
  int cycles = 100;
  std::optional<std::size_t> candidate_cap;  // every C-subset per reference by default
  MIConfig mi{MIVariant::distances, 1.0, 100, 0};
  SigmaMode sigma_mode = SigmaMode::data_driven;
  MDSConfig mds;
  OracleSpec oracle;
  std::vector<MdsArm> arms;
};

struct PoolArm {
  std::string name;
  std::size_t top_count = 0;  // B'; 0 gives uniformly random batches
};

/// Fixed-pool batch protocol on a Mahalanobis ground truth, learner = MDS.
struct PoolExperimentConfig {
  std::size_t n_items = 100;
  std::size_t dim = 10;
  std::size_t query_length = 3;
  std::size_t train_pool = 20000;
  std::size_t test_triplets = 20000;
  double corruption = 0.25;
  int burn_in = 20;
  int batches = 20;
  std::size_t batch_size = 10;
  std::vector<PoolArm> arms;
  MIConfig mi{MIVariant::embedding, 1.0, 100, 0};
  double mi_mu = 1e-5;
  MDSConfig mds{0.5, 500, {1e-5, MuSchedule::constant, 0.99}, MDSInit::uniform01};
  std::optional<std::string> features_path;  // otherwise N x D standard normal items
};

struct ClassificationExperimentConfig {
  std::size_t n_train = 400;
  std::size_t n_test = 400;
  std::size_t n_classes = 4;
  double blob_std = 1.0;
  double blob_radius = 2.0;  // centers evenly spaced on a circle
  std::size_t initial_per_class = 5;
  ALConfig al;
  std::vector<Acquisition> acquisitions{Acquisition::info_nn_m, Acquisition::random, Acquisition::max_entropy,
                                        Acquisition::k_center};
  std::optional<std::string> features_path;  // labeled table, split half train / half test
};

struct TimingConfig {
  std::size_t n_items = 20;
  std::size_t dim = 2;
  std::vector<std::size_t> lengths{2, 3, 4};
  MIConfig mi{MIVariant::distances, 1.0, 100, 0};
  double mu = 1.0;
  std::size_t repetitions = 10;
  std::optional<std::size_t> candidate_cap;  // all C-subsets of the other items by default
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string state_dir = "sessions";
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::mds_synthetic;
  int trials = 1;
  std::uint64_t base_seed = 0;
  MdsExperimentConfig mds;
  PoolExperimentConfig pool;
  ClassificationExperimentConfig classification;
  TimingConfig timing;
  ServeConfig serve;
};

/// Defaults for a kind, including its default arms.
ExperimentConfig default_config(ExperimentKind kind);

void validate_config(const ExperimentConfig& cfg);

/// Reads a JSON key-value tree; absent keys keep the kind's defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);
std::string to_string(Acquisition a);
Acquisition acquisition_from_string(const std::string& s);
std::string to_string(ClassifierKind k);
ClassifierKind classifier_kind_from_string(const std::string& s);
std::string to_string(MuSchedule s);
MuSchedule mu_schedule_from_string(const std::string& s);
std::string to_string(MIVariant v);
MIVariant mi_variant_from_string(const std::string& s);

// Pieces shared with the session service.
nlohmann::json mds_config_to_json(const MDSConfig& m);
MDSConfig mds_config_from_json(const nlohmann::json& j, MDSConfig base);
nlohmann::json mi_config_to_json(const MIConfig& m);
MIConfig mi_config_from_json(const nlohmann::json& j, MIConfig base);

}  // namespace infonn
