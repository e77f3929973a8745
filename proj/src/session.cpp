#include "infonn/session.hpp"

#include "infonn/config.hpp"
#include "infonn/ingest.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>
#include <regex>

namespace infonn {

using nlohmann::json;

namespace {

json query_to_json(const NNQuery& q) {
  json c = json::array();
  for (const auto& i : q.candidates) c.push_back(i.index);
  return {{"reference", q.reference.index}, {"candidates", c}};
}

NNQuery query_from_json(const json& j) {
  NNQuery q{ItemId{j.at("reference").get<std::size_t>()}, {}};
  for (const auto& c : j.at("candidates")) q.candidates.push_back(ItemId{c.get<std::size_t>()});
  return q;
}

json fit_to_json(const FitReport& f) {
  return {{"mu", f.mu},
          {"loss_before", f.loss_before},
          {"loss_after", f.loss_after},
          {"step_halvings", f.step_halvings},
          {"final_step", f.final_step}};
}

FitReport fit_from_json(const json& j) {
  FitReport f;
  f.mu = j.at("mu").get<double>();
  f.loss_before = j.at("loss_before").get<double>();
  f.loss_after = j.at("loss_after").get<double>();
  f.step_halvings = j.at("step_halvings").get<int>();
  f.final_step = j.at("final_step").get<double>();
  return f;
}

json matrix_to_json(const Embedding& z) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < z.cols(); ++j) row.push_back(z(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Embedding matrix_from_json(const json& j, std::size_t rows, std::size_t cols) {
  if (j.size() != rows) throw std::invalid_argument("embedding has the wrong number of rows");
  Embedding z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw std::invalid_argument("embedding has the wrong number of columns");
    for (std::size_t k = 0; k < cols; ++k)
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return z;
}

bool valid_id(const std::string& id) {
  static const std::regex pattern("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id, pattern);
}

std::vector<ItemInfo> load_items(const DatasetRef& d) {
  std::vector<ItemInfo> items;
  if (d.features_path) {
    const auto t = ingest_features(*d.features_path);
    for (std::size_t i = 0; i < t.size(); ++i) items.push_back({i, t.ids[i], t.names ? (*t.names)[i] : t.ids[i]});
  } else {
    for (std::size_t i = 0; i < d.n_items; ++i) items.push_back({i, std::to_string(i), "item " + std::to_string(i)});
  }
  return items;
}

json item_json(const ItemInfo& item) { return {{"index", item.index}, {"id", item.id}, {"name", item.name}}; }

std::size_t comparisons_of(const CycleRecord& r) {
  const auto c = r.query.length();
  return r.response.size() > 1 ? c * (c - 1) / 2 : c - 1;
}

}  // namespace

json active_config_to_json(const ActiveLoopConfig& c) {
  return {{"n_items", c.n_items},
          {"dim", c.dim},
          {"query_length", c.query_length},
          {"cycles", c.cycles},
          {"burn_in", c.burn_in},
          {"candidate_cap", c.candidate_cap ? json(*c.candidate_cap) : json(nullptr)},
          {"family", c.family == QueryFamily::ranking ? "ranking" : "nearest_neighbor"},
          {"selection", c.selection == SelectionRule::random ? "random" : "info_nn"},
          {"mi", mi_config_to_json(c.mi)},
          {"sigma_mode", c.sigma_mode == SigmaMode::fixed ? "fixed" : "data_driven"},
          {"mds", mds_config_to_json(c.mds)},
          {"seed", c.seed}};
}

ActiveLoopConfig active_config_from_json(const json& j, ActiveLoopConfig c) {
  auto pick = [&](const char* key, const char* a, const char* b) -> std::optional<bool> {
    if (!j.contains(key)) return std::nullopt;
    const auto s = j.at(key).get<std::string>();
    if (s != a && s != b) throw std::invalid_argument(std::string(key) + " must be " + a + " or " + b);
    return s == b;
  };
  if (j.contains("n_items")) c.n_items = j.at("n_items").get<std::size_t>();
  if (j.contains("dim")) c.dim = j.at("dim").get<std::size_t>();
  if (j.contains("query_length")) c.query_length = j.at("query_length").get<std::size_t>();
  if (j.contains("cycles")) c.cycles = j.at("cycles").get<int>();
  if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<int>();
  if (j.contains("candidate_cap")) {
    const auto& v = j.at("candidate_cap");
    c.candidate_cap = v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
  }
  if (auto r = pick("family", "nearest_neighbor", "ranking")) c.family = *r ? QueryFamily::ranking : QueryFamily::nearest_neighbor;
  if (auto r = pick("selection", "info_nn", "random")) c.selection = *r ? SelectionRule::random : SelectionRule::info_nn;
  if (auto r = pick("sigma_mode", "data_driven", "fixed")) c.sigma_mode = *r ? SigmaMode::fixed : SigmaMode::data_driven;
  if (j.contains("mi")) c.mi = mi_config_from_json(j.at("mi"), c.mi);
  if (j.contains("mds")) c.mds = mds_config_from_json(j.at("mds"), c.mds);
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json session_state_to_json(const SessionState& s) {
  const auto& e = s.embedder;
  json store = json::array();
  for (const auto& c : e.store.items()) store.push_back({c.reference.index, c.winner.index, c.loser.index});
  json history = json::array();
  for (const auto& r : e.history)
    history.push_back({{"cycle", r.cycle},
                       {"query", query_to_json(r.query)},
                       {"response", r.response},
                       {"mi", r.mi},
                       {"mu", r.mu},
                       {"sigma2", r.sigma2},
                       {"fitted", r.fitted},
                       {"fit", fit_to_json(r.fit)}});
  return {{"id", s.id},
          {"dataset",
           {{"features_path", s.dataset.features_path ? json(*s.dataset.features_path) : json(nullptr)},
            {"n_items", s.dataset.n_items}}},
          {"config", active_config_to_json(e.config)},
          {"z", matrix_to_json(e.z)},
          {"store", store},
          {"burn_in_answered", e.burn_in_answered},
          {"cycle", e.cycle},
          {"pending", e.pending ? query_to_json(*e.pending) : json(nullptr)},
          {"pending_mi", e.pending_mi},
          {"pending_mu", e.pending_mu},
          {"pending_sigma2", e.pending_sigma2},
          {"rng_state", e.rng_state},
          {"history", history}};
}

SessionState session_state_from_json(const json& j) {
  SessionState s;
  s.id = j.at("id").get<std::string>();
  const auto& d = j.at("dataset");
  if (!d.at("features_path").is_null()) s.dataset.features_path = d.at("features_path").get<std::string>();
  s.dataset.n_items = d.at("n_items").get<std::size_t>();

  auto& e = s.embedder;
  e.config = active_config_from_json(j.at("config"));
  e.z = matrix_from_json(j.at("z"), e.config.n_items, e.config.dim);
  for (const auto& c : j.at("store"))
    e.store.append(PairedComparison{ItemId{c.at(0).get<std::size_t>()}, ItemId{c.at(1).get<std::size_t>()},
                                    ItemId{c.at(2).get<std::size_t>()}});
  e.burn_in_answered = j.at("burn_in_answered").get<int>();
  e.cycle = j.at("cycle").get<int>();
  if (!j.at("pending").is_null()) e.pending = query_from_json(j.at("pending"));
  e.pending_mi = j.at("pending_mi").get<double>();
  e.pending_mu = j.at("pending_mu").get<double>();
  e.pending_sigma2 = j.at("pending_sigma2").get<double>();
  e.rng_state = j.at("rng_state").get<std::string>();
  for (const auto& h : j.at("history")) {
    CycleRecord r;
    r.cycle = h.at("cycle").get<int>();
    r.query = query_from_json(h.at("query"));
    r.response = h.at("response").get<std::vector<std::size_t>>();
    r.mi = h.at("mi").get<double>();
    r.mu = h.at("mu").get<double>();
    r.sigma2 = h.at("sigma2").get<double>();
    r.fitted = h.at("fitted").get<bool>();
    r.fit = fit_from_json(h.at("fit"));
    e.history.push_back(std::move(r));
  }
  return s;
}

Eigen::MatrixX2d principal_projection(const Embedding& z) {
  Eigen::MatrixX2d out = Eigen::MatrixX2d::Zero(z.rows(), 2);
  if (z.rows() == 0) return out;
  const Embedding centered = z.rowwise() - z.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index d = cov.rows();
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, d); ++k) {
    // eigenvalues come in increasing order
    Eigen::VectorXd axis = eig.eigenvectors().col(d - 1 - k);
    Eigen::Index big = 0;
    axis.cwiseAbs().maxCoeff(&big);
    if (axis(big) < 0) axis = -axis;
    out.col(k) = centered * axis;
  }
  return out;
}

struct SessionManager::Session {
  Session(SessionState meta, ActiveEmbedder e) : meta(std::move(meta)), embedder(std::move(e)) {
    items = load_items(this->meta.dataset);
    if (items.size() != embedder.config().n_items)
      throw std::invalid_argument("dataset item count does not match the session configuration");
  }

  std::mutex mutex;
  SessionState meta;  // id and dataset; the embedder owns the loop state
  ActiveEmbedder embedder;
  std::vector<ItemInfo> items;
};

SessionManager::SessionManager(std::optional<std::filesystem::path> state_dir) : state_dir_(std::move(state_dir)) {
  if (!state_dir_) return;
  std::filesystem::create_directories(*state_dir_);
  static const std::regex pattern("session-([0-9]+)\\.json");
  for (const auto& entry : std::filesystem::directory_iterator(*state_dir_)) {
    std::smatch m;
    const auto name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) next_id_ = std::max<std::size_t>(next_id_, std::stoull(m[1]) + 1);
  }
}

SessionManager::~SessionManager() = default;

std::string SessionManager::create_session(const json& request) {
  DatasetRef dataset;
  ActiveLoopConfig cfg;
  if (request.contains("dataset")) {
    const auto& d = request.at("dataset");
    if (d.contains("features_path")) dataset.features_path = d.at("features_path").get<std::string>();
    if (d.contains("n_items")) dataset.n_items = d.at("n_items").get<std::size_t>();
  }
  if (request.contains("config")) cfg = active_config_from_json(request.at("config"), cfg);
  if (dataset.features_path) {
    dataset.n_items = load_items(dataset).size();
  } else if (dataset.n_items == 0) {
    dataset.n_items = cfg.n_items;
  }
  cfg.n_items = dataset.n_items;

  std::lock_guard lock(mutex_);
  const std::string id = "session-" + std::to_string(next_id_++);
  auto s = std::make_unique<Session>(SessionState{id, dataset, {}}, ActiveEmbedder(cfg));
  persist(*s);
  sessions_.emplace(id, std::move(s));
  return id;
}

SessionManager::Session& SessionManager::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return *it->second;
  if (!state_dir_ || !valid_id(id)) throw SessionNotFound("unknown session '" + id + "'");
  const auto path = *state_dir_ / (id + ".json");
  std::ifstream in(path);
  if (!in) throw SessionNotFound("unknown session '" + id + "'");
  SessionState st = session_state_from_json(json::parse(in));
  if (st.id != id) throw std::runtime_error("session file " + path.string() + " holds a different id");
  ActiveEmbedder e(st.embedder);
  st.embedder = {};
  auto s = std::make_unique<Session>(std::move(st), std::move(e));
  return *sessions_.emplace(id, std::move(s)).first->second;
}

void SessionManager::persist(const Session& s) const {
  if (!state_dir_) return;
  SessionState st{s.meta.id, s.meta.dataset, s.embedder.state()};
  const auto path = *state_dir_ / (s.meta.id + ".json");
  const auto tmp = *state_dir_ / (s.meta.id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << session_state_to_json(st).dump() << '\n';
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SessionState SessionManager::state(const std::string& id) {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  return {s.meta.id, s.meta.dataset, s.embedder.state()};
}

json SessionManager::next_query(const std::string& id) {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  auto& e = s.embedder;
  json out{{"session_id", id},
           {"cycle", e.cycle()},
           {"phase", e.phase() == LoopPhase::burn_in ? "burn_in" : "active"},
           {"finished", e.finished()}};
  if (e.finished()) return out;
  const bool fresh = !e.has_pending();
  const NNQuery& q = e.next_query();
  if (fresh) persist(s);
  json candidates = json::array();
  for (const auto& c : q.candidates) candidates.push_back(item_json(s.items[c.index]));
  out["query"] = {{"reference", item_json(s.items[q.reference.index])}, {"candidates", candidates}};
  out["family"] = e.config().family == QueryFamily::ranking ? "ranking" : "nearest_neighbor";
  return out;
}

json SessionManager::submit_response(const std::string& id, const json& body) {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  auto& e = s.embedder;
  if (!e.has_pending()) throw SessionConflict("no pending query; call next-query first");
  int cycle = 0;
  if (e.config().family == QueryFamily::ranking) {
    if (!body.contains("order")) throw std::invalid_argument("ranking sessions expect an 'order' array");
    cycle = e.submit_ranking(body.at("order").get<std::vector<std::size_t>>());
  } else {
    if (!body.contains("winner") || !body.at("winner").is_number_integer())
      throw std::invalid_argument("expected an integer 'winner'");
    const auto w = body.at("winner").get<long long>();
    if (w < 1) throw std::invalid_argument("winner index must be at least 1");
    cycle = e.submit_nn(static_cast<std::size_t>(w));
  }
  persist(s);
  return {{"accepted", true}, {"cycle", cycle}, {"finished", e.finished()}};
}

json SessionManager::snapshot(const std::string& id) {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  const auto& e = s.embedder;
  const Eigen::MatrixX2d p = principal_projection(e.embedding());
  json projection = json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) projection.push_back({p(i, 0), p(i, 1)});
  json items = json::array();
  for (const auto& item : s.items) items.push_back(item_json(item));

  json cycle = json::array(), mi = json::array(), mu = json::array(), sigma2 = json::array(), loss = json::array(),
       comparisons = json::array();
  std::size_t total = 0;
  for (const auto& r : e.history()) {
    total += comparisons_of(r);
    if (!r.fitted) continue;
    cycle.push_back(r.cycle);
    mi.push_back(r.mi);
    mu.push_back(r.mu);
    sigma2.push_back(r.sigma2);
    loss.push_back(r.fit.loss_after);
    comparisons.push_back(total);
  }
  return {{"session_id", id},
          {"cycle", e.cycle()},
          {"phase", e.phase() == LoopPhase::burn_in ? "burn_in" : "active"},
          {"finished", e.finished()},
          {"items", items},
          {"projection", projection},
          {"metrics",
           {{"cycle", cycle}, {"mi", mi}, {"mu", mu}, {"sigma2", sigma2}, {"loss", loss}, {"comparisons", comparisons}}}};
}

}  // namespace infonn
