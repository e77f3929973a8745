#include "infonn/config.hpp"

#include <fstream>

namespace infonn {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E enum_from(const std::string& s, const std::array<std::pair<E, const char*>, N>& table, const char* what) {
  for (const auto& [e, name] : table)
    if (s == name) return e;
  throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

template <typename E, std::size_t N>
std::string enum_to(E e, const std::array<std::pair<E, const char*>, N>& table) {
  for (const auto& [v, name] : table)
    if (v == e) return name;
  throw std::logic_error("enum value without a name");
}

constexpr std::array<std::pair<ExperimentKind, const char*>, 6> kKinds{{
    {ExperimentKind::mds_synthetic, "mds_synthetic"},
    {ExperimentKind::mds_vs_ranking, "mds_vs_ranking"},
    {ExperimentKind::dml_pool, "dml_pool"},
    {ExperimentKind::classification, "classification"},
    {ExperimentKind::timing_bench, "timing_bench"},
    {ExperimentKind::serve, "serve"},
}};
constexpr std::array<std::pair<Acquisition, const char*>, 4> kAcquisitions{{
    {Acquisition::info_nn_m, "info_nn_m"},
    {Acquisition::max_entropy, "max_entropy"},
    {Acquisition::random, "random"},
    {Acquisition::k_center, "k_center"},
}};
constexpr std::array<std::pair<ClassifierKind, const char*>, 3> kClassifiers{{
    {ClassifierKind::nearest_centroid, "nearest_centroid"},
    {ClassifierKind::knn, "knn"},
    {ClassifierKind::multinomial_logit, "multinomial_logit"},
}};
constexpr std::array<std::pair<MuSchedule, const char*>, 3> kSchedules{{
    {MuSchedule::constant, "constant"},
    {MuSchedule::diminishing, "diminishing"},
    {MuSchedule::max_distance, "max_distance"},
}};
constexpr std::array<std::pair<MIVariant, const char*>, 2> kVariants{{
    {MIVariant::embedding, "embedding"},
    {MIVariant::distances, "distances"},
}};

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

void read_optional(const json& j, const char* key, std::optional<std::size_t>& field) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    field.reset();
  } else {
    field = j.at(key).get<std::size_t>();
  }
}

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string to_string(ExperimentKind kind) { return enum_to(kind, kKinds); }
ExperimentKind experiment_kind_from_string(const std::string& s) { return enum_from(s, kKinds, "experiment kind"); }
std::string to_string(Acquisition a) { return enum_to(a, kAcquisitions); }
Acquisition acquisition_from_string(const std::string& s) { return enum_from(s, kAcquisitions, "acquisition"); }
std::string to_string(ClassifierKind k) { return enum_to(k, kClassifiers); }
ClassifierKind classifier_kind_from_string(const std::string& s) { return enum_from(s, kClassifiers, "classifier"); }
std::string to_string(MuSchedule s) { return enum_to(s, kSchedules); }
MuSchedule mu_schedule_from_string(const std::string& s) { return enum_from(s, kSchedules, "mu schedule"); }
std::string to_string(MIVariant v) { return enum_to(v, kVariants); }
MIVariant mi_variant_from_string(const std::string& s) { return enum_from(s, kVariants, "MI variant"); }

MdsArm parse_arm(const std::string& name) {
  const auto first = name.find('-');
  const auto second = name.find('-', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos)
    throw std::invalid_argument("arm '" + name + "' must look like info-nn-3 or random-rank-3");
  const std::string sel = name.substr(0, first);
  const std::string fam = name.substr(first + 1, second - first - 1);
  MdsArm arm{name};
  if (sel == "info") {
    arm.selection = SelectionRule::info_nn;
  } else if (sel == "random") {
    arm.selection = SelectionRule::random;
  } else {
    throw std::invalid_argument("arm '" + name + "': selection must be info or random");
  }
  if (fam == "nn") {
    arm.family = QueryFamily::nearest_neighbor;
  } else if (fam == "rank") {
    arm.family = QueryFamily::ranking;
  } else {
    throw std::invalid_argument("arm '" + name + "': family must be nn or rank");
  }
  try {
    arm.query_length = std::stoul(name.substr(second + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("arm '" + name + "': bad query length");
  }
  if (arm.query_length < 2) throw std::invalid_argument("arm '" + name + "': query length must be >= 2");
  return arm;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case ExperimentKind::mds_synthetic:
      cfg.trials = 20;
      cfg.mds.arms = {parse_arm("info-nn-3"), parse_arm("random-nn-3"), parse_arm("random-nn-5")};
      break;
    case ExperimentKind::mds_vs_ranking:
      cfg.trials = 20;
      cfg.mds.arms = {parse_arm("info-nn-3"), parse_arm("info-nn-4"), parse_arm("random-rank-3")};
      break;
    case ExperimentKind::dml_pool:
      cfg.trials = 20;
      cfg.pool.arms = {{"info-nn", cfg.pool.batch_size}, {"random-nn", 0}};
      break;
    case ExperimentKind::classification:
      cfg.trials = 3;
      break;
    case ExperimentKind::timing_bench:
    case ExperimentKind::serve:
      break;
  }
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  switch (cfg.kind) {
    case ExperimentKind::mds_synthetic:
    case ExperimentKind::mds_vs_ranking: {
      if (cfg.mds.arms.empty()) throw std::invalid_argument("MDS experiment needs at least one arm");
      for (const auto& arm : cfg.mds.arms) {
        ActiveLoopConfig a;
        a.n_items = cfg.mds.n_items;
        a.dim = cfg.mds.dim;
        a.query_length = arm.query_length;
        a.family = arm.family;
        a.burn_in = cfg.mds.burn_in;
        a.cycles = cfg.mds.cycles;
        a.mi = cfg.mds.mi;
        a.mds = cfg.mds.mds;
        validate_active_config(a);
        if (arm.family == QueryFamily::ranking && cfg.mds.oracle.corruption > 0.0)
          throw std::invalid_argument("answer corruption is defined for NN queries only; arm '" + arm.name +
                                      "' asks ranking queries");
      }
      if (!(cfg.mds.oracle.corruption >= 0.0 && cfg.mds.oracle.corruption <= 1.0))
        throw std::invalid_argument("corruption rate must lie in [0,1]");
      break;
    }
    case ExperimentKind::dml_pool:
      if (cfg.pool.arms.empty()) throw std::invalid_argument("pool experiment needs at least one arm");
      for (const auto& arm : cfg.pool.arms) validate_batch_config({cfg.pool.batch_size, arm.top_count});
      validate_mi_config(cfg.pool.mi);
      validate_mds_config(cfg.pool.mds);
      if (!(cfg.pool.corruption >= 0.0 && cfg.pool.corruption <= 1.0))
        throw std::invalid_argument("corruption rate must lie in [0,1]");
      break;
    case ExperimentKind::classification:
      if (cfg.classification.acquisitions.empty()) throw std::invalid_argument("need at least one acquisition");
      if (cfg.classification.n_classes < 2) throw std::invalid_argument("need at least 2 classes");
      break;
    case ExperimentKind::timing_bench:
      for (auto k : cfg.timing.lengths)
        if (k < 2 || k > 5) throw std::invalid_argument("timing bench query lengths must lie in 2..5");
      if (cfg.timing.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
      validate_mi_config(cfg.timing.mi);
      break;
    case ExperimentKind::serve:
      break;
  }
}

json mds_config_to_json(const MDSConfig& m) {
  return {{"step_size", m.step_size},
          {"iterations", m.iterations},
          {"mu", m.mu_schedule.mu},
          {"mu_schedule", to_string(m.mu_schedule.schedule)},
          {"mu_rate", m.mu_schedule.rate},
          {"init", m.init == MDSInit::warm_start ? "warm_start" : "uniform01"}};
}

MDSConfig mds_config_from_json(const json& j, MDSConfig m) {
  read(j, "step_size", m.step_size);
  read(j, "iterations", m.iterations);
  read(j, "mu", m.mu_schedule.mu);
  read(j, "mu_rate", m.mu_schedule.rate);
  if (j.contains("mu_schedule")) m.mu_schedule.schedule = mu_schedule_from_string(j.at("mu_schedule").get<std::string>());
  if (j.contains("init")) {
    const auto s = j.at("init").get<std::string>();
    if (s != "uniform01" && s != "warm_start") throw std::invalid_argument("init must be uniform01 or warm_start");
    m.init = s == "warm_start" ? MDSInit::warm_start : MDSInit::uniform01;
  }
  return m;
}

json mi_config_to_json(const MIConfig& m) {
  return {{"variant", to_string(m.variant)}, {"sigma2", m.sigma2}, {"n_samples", m.n_samples}, {"seed", m.seed}};
}

MIConfig mi_config_from_json(const json& j, MIConfig m) {
  if (j.contains("variant")) m.variant = mi_variant_from_string(j.at("variant").get<std::string>());
  read(j, "sigma2", m.sigma2);
  read(j, "n_samples", m.n_samples);
  read(j, "seed", m.seed);
  return m;
}

ExperimentConfig config_from_json(const json& j) {
  const auto kind = experiment_kind_from_string(j.value("experiment", std::string("mds_synthetic")));
  ExperimentConfig cfg = default_config(kind);
  read(j, "trials", cfg.trials);
  read(j, "base_seed", cfg.base_seed);

  if (j.contains("mds")) {
    const json& m = j.at("mds");
    auto& c = cfg.mds;
    read(m, "n_items", c.n_items);
    read(m, "dim", c.dim);
    read(m, "burn_in", c.burn_in);
    read(m, "cycles", c.cycles);
    read_optional(m, "candidate_cap", c.candidate_cap);
    if (m.contains("mi")) c.mi = mi_config_from_json(m.at("mi"), c.mi);
    if (m.contains("sigma_mode")) {
      const auto s = m.at("sigma_mode").get<std::string>();
      if (s != "fixed" && s != "data_driven") throw std::invalid_argument("sigma_mode must be fixed or data_driven");
      c.sigma_mode = s == "fixed" ? SigmaMode::fixed : SigmaMode::data_driven;
    }
    if (m.contains("fit")) c.mds = mds_config_from_json(m.at("fit"), c.mds);
    if (m.contains("oracle")) {
      const json& o = m.at("oracle");
      const auto k = o.value("kind", std::string("deterministic"));
      if (k != "deterministic" && k != "pl_noisy") throw std::invalid_argument("oracle kind must be deterministic or pl_noisy");
      c.oracle.kind = k == "pl_noisy" ? OracleSpec::Kind::pl_noisy : OracleSpec::Kind::deterministic;
      read(o, "mu", c.oracle.mu);
      read(o, "corruption", c.oracle.corruption);
    }
    if (m.contains("arms")) {
      c.arms.clear();
      for (const auto& a : m.at("arms")) c.arms.push_back(parse_arm(a.get<std::string>()));
    }
  }

  if (j.contains("pool")) {
    const json& p = j.at("pool");
    auto& c = cfg.pool;
    read(p, "n_items", c.n_items);
    read(p, "dim", c.dim);
    read(p, "query_length", c.query_length);
    read(p, "train_pool", c.train_pool);
    read(p, "test_triplets", c.test_triplets);
    read(p, "corruption", c.corruption);
    read(p, "burn_in", c.burn_in);
    read(p, "batches", c.batches);
    read(p, "batch_size", c.batch_size);
    read(p, "mi_mu", c.mi_mu);
    if (p.contains("mi")) c.mi = mi_config_from_json(p.at("mi"), c.mi);
    if (p.contains("fit")) c.mds = mds_config_from_json(p.at("fit"), c.mds);
    if (p.contains("features_path")) c.features_path = p.at("features_path").get<std::string>();
    if (p.contains("arms")) {
      c.arms.clear();
      for (const auto& a : p.at("arms")) c.arms.push_back({a.at("name").get<std::string>(), a.at("top_count").get<std::size_t>()});
    } else {
      c.arms = {{"info-nn", c.batch_size}, {"random-nn", 0}};
    }
  }

  if (j.contains("classification")) {
    const json& k = j.at("classification");
    auto& c = cfg.classification;
    read(k, "n_train", c.n_train);
    read(k, "n_test", c.n_test);
    read(k, "n_classes", c.n_classes);
    read(k, "blob_std", c.blob_std);
    read(k, "blob_radius", c.blob_radius);
    read(k, "initial_per_class", c.initial_per_class);
    read(k, "batch", c.al.batch);
    read(k, "cycles", c.al.cycles);
    read(k, "query_length", c.al.query_length);
    read(k, "n_samples", c.al.n_samples);
    read(k, "kmeans_cycles", c.al.kmeans_cycles);
    if (k.contains("model")) {
      const json& m = k.at("model");
      if (m.contains("kind")) c.al.model.kind = classifier_kind_from_string(m.at("kind").get<std::string>());
      read(m, "k", c.al.model.k);
      read(m, "learning_rate", c.al.model.learning_rate);
      read(m, "epochs", c.al.model.epochs);
      read(m, "l2", c.al.model.l2);
    }
    if (k.contains("acquisitions")) {
      c.acquisitions.clear();
      for (const auto& a : k.at("acquisitions")) c.acquisitions.push_back(acquisition_from_string(a.get<std::string>()));
    }
    if (k.contains("features_path")) c.features_path = k.at("features_path").get<std::string>();
  }

  if (j.contains("timing")) {
    const json& t = j.at("timing");
    auto& c = cfg.timing;
    read(t, "n_items", c.n_items);
    read(t, "dim", c.dim);
    read(t, "lengths", c.lengths);
    read(t, "mu", c.mu);
    read(t, "repetitions", c.repetitions);
    read_optional(t, "candidate_cap", c.candidate_cap);
    if (t.contains("mi")) c.mi = mi_config_from_json(t.at("mi"), c.mi);
  }

  if (j.contains("serve")) {
    const json& s = j.at("serve");
    read(s, "host", cfg.serve.host);
    read(s, "port", cfg.serve.port);
    read(s, "state_dir", cfg.serve.state_dir);
  }
  validate_config(cfg);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json arms = json::array();
  for (const auto& a : cfg.mds.arms) arms.push_back(a.name);
  json pool_arms = json::array();
  for (const auto& a : cfg.pool.arms) pool_arms.push_back({{"name", a.name}, {"top_count", a.top_count}});
  json acqs = json::array();
  for (auto a : cfg.classification.acquisitions) acqs.push_back(to_string(a));

  const auto& m = cfg.mds;
  const auto& p = cfg.pool;
  const auto& k = cfg.classification;
  const auto& t = cfg.timing;
  return {
      {"experiment", to_string(cfg.kind)},
      {"trials", cfg.trials},
      {"base_seed", cfg.base_seed},
      {"mds",
       {{"n_items", m.n_items},
        {"dim", m.dim},
        {"burn_in", m.burn_in},
        {"cycles", m.cycles},
        {"candidate_cap", optional_json(m.candidate_cap)},
        {"mi", mi_config_to_json(m.mi)},
        {"sigma_mode", m.sigma_mode == SigmaMode::fixed ? "fixed" : "data_driven"},
        {"fit", mds_config_to_json(m.mds)},
        {"oracle",
         {{"kind", m.oracle.kind == OracleSpec::Kind::pl_noisy ? "pl_noisy" : "deterministic"},
          {"mu", m.oracle.mu},
          {"corruption", m.oracle.corruption}}},
        {"arms", arms}}},
      {"pool",
       {{"n_items", p.n_items},
        {"dim", p.dim},
        {"query_length", p.query_length},
        {"train_pool", p.train_pool},
        {"test_triplets", p.test_triplets},
        {"corruption", p.corruption},
        {"burn_in", p.burn_in},
        {"batches", p.batches},
        {"batch_size", p.batch_size},
        {"mi_mu", p.mi_mu},
        {"mi", mi_config_to_json(p.mi)},
        {"fit", mds_config_to_json(p.mds)},
        {"arms", pool_arms}}},
      {"classification",
       {{"n_train", k.n_train},
        {"n_test", k.n_test},
        {"n_classes", k.n_classes},
        {"blob_std", k.blob_std},
        {"blob_radius", k.blob_radius},
        {"initial_per_class", k.initial_per_class},
        {"batch", k.al.batch},
        {"cycles", k.al.cycles},
        {"query_length", k.al.query_length},
        {"n_samples", k.al.n_samples},
        {"kmeans_cycles", k.al.kmeans_cycles},
        {"model",
         {{"kind", to_string(k.al.model.kind)},
          {"k", k.al.model.k},
          {"learning_rate", k.al.model.learning_rate},
          {"epochs", k.al.model.epochs},
          {"l2", k.al.model.l2}}},
        {"acquisitions", acqs}}},
      {"timing",
       {{"n_items", t.n_items},
        {"dim", t.dim},
        {"lengths", t.lengths},
        {"mu", t.mu},
        {"repetitions", t.repetitions},
        {"candidate_cap", optional_json(t.candidate_cap)},
        {"mi", mi_config_to_json(t.mi)}}},
      {"serve", {{"host", cfg.serve.host}, {"port", cfg.serve.port}, {"state_dir", cfg.serve.state_dir}}},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
}

}  // namespace infonn
