#include "infonn/active_embed.hpp"

#include <algorithm>
#include <sstream>

namespace infonn {

void validate_active_config(const ActiveLoopConfig& cfg) {
  if (cfg.query_length < 2) throw std::invalid_argument("query length must be at least 2");
  if (cfg.n_items < cfg.query_length + 1) throw std::invalid_argument("need at least C+1 items");
  if (cfg.dim < 1) throw std::invalid_argument("embedding dimension must be at least 1");
  if (cfg.burn_in < 0) throw std::invalid_argument("burn-in must be nonnegative");
  if (cfg.cycles < 0) throw std::invalid_argument("cycle count must be nonnegative");
  if (cfg.family == QueryFamily::ranking && cfg.query_length > kMaxRankingLength)
    throw std::invalid_argument("ranking queries support at most 6 candidates");
  validate_mi_config(cfg.mi);
  validate_mds_config(cfg.mds);
}

namespace {

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& s) {
  Rng rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw std::invalid_argument("corrupt RNG state");
  return rng;
}

}  // namespace

ActiveEmbedder::ActiveEmbedder(ActiveLoopConfig cfg) : rng_(derive_seed(cfg.seed, 0)) {
  validate_active_config(cfg);
  state_.config = std::move(cfg);
  state_.z = uniform_init(state_.config.n_items, state_.config.dim, rng_);
}

ActiveEmbedder::ActiveEmbedder(ActiveEmbedderState state) : state_(std::move(state)) {
  validate_active_config(state_.config);
  rng_ = rng_from_string(state_.rng_state);
  if (static_cast<std::size_t>(state_.z.rows()) != state_.config.n_items ||
      static_cast<std::size_t>(state_.z.cols()) != state_.config.dim)
    throw std::invalid_argument("restored embedding does not match the configuration");
  state_.rng_state.clear();
}

ActiveEmbedderState ActiveEmbedder::state() const {
  ActiveEmbedderState s = state_;
  s.rng_state = rng_to_string(rng_);
  return s;
}

const NNQuery& ActiveEmbedder::next_query() {
  if (state_.pending) return *state_.pending;
  const auto& cfg = state_.config;
  if (phase() == LoopPhase::burn_in) {
    state_.pending = random_query(cfg.n_items, cfg.query_length, rng_);
    state_.pending_mi = 0.0;
    state_.pending_mu = 0.0;
    state_.pending_sigma2 = 0.0;
  } else {
    select_active();
  }
  return *state_.pending;
}

void ActiveEmbedder::select_active() {
  const auto& cfg = state_.config;
  const int k = state_.cycle + 1;
  const DistanceStats stats = distance_stats(state_.z);
  state_.pending_mu = mu_value(cfg.mds.mu_schedule, k, stats.max);
  state_.pending_sigma2 = cfg.sigma_mode == SigmaMode::data_driven ? stats.variance : cfg.mi.sigma2;

  if (cfg.selection == SelectionRule::random) {
    state_.pending = random_query(cfg.n_items, cfg.query_length, rng_);
    state_.pending_mi = 0.0;
    return;
  }

  // Every reference contributes its candidate sets; the pool is ordered by
  // reference, so a global argmax with lowest-index ties equals the
  // per-reference maximum followed by the lowest-reference tie rule.
  QueryPool pool;
  for (std::size_t j = 0; j < cfg.n_items; ++j) {
    auto part = enumerate_candidate_queries(cfg.n_items, cfg.query_length, ItemId{j}, cfg.candidate_cap, rng_);
    pool.queries.insert(pool.queries.end(), std::make_move_iterator(part.queries.begin()),
                        std::make_move_iterator(part.queries.end()));
  }

  MIConfig mi = cfg.mi;
  mi.sigma2 = state_.pending_sigma2;
  mi.seed = derive_seed(cfg.mi.seed, static_cast<std::uint64_t>(k));

  MIScores scores;
  if (cfg.family == QueryFamily::ranking) {
    std::vector<RankingQuery> rq;
    rq.reserve(pool.size());
    for (const auto& q : pool.queries) rq.push_back({q.reference, q.candidates});
    scores = ranking_mi(state_.z, rq, mi, state_.pending_mu);
  } else {
    scores = score_pool(state_.z, pool, mi, state_.pending_mu);
  }
  const std::size_t best = scores.argmax();
  state_.pending = std::move(pool.queries[best]);
  state_.pending_mi = scores.values[best];
}

int ActiveEmbedder::submit_nn(std::size_t winner) {
  if (!state_.pending) throw std::logic_error("no pending query");
  if (state_.config.family != QueryFamily::nearest_neighbor)
    throw std::logic_error("this loop expects ranking responses");
  QueryResponse r{*state_.pending, winner};
  validate_response(r);
  apply(decompose_nn(r), {winner});
  return state_.cycle;
}

int ActiveEmbedder::submit_ranking(const std::vector<std::size_t>& order) {
  if (!state_.pending) throw std::logic_error("no pending query");
  if (state_.config.family != QueryFamily::ranking) throw std::logic_error("this loop expects NN responses");
  RankingResponse r{{state_.pending->reference, state_.pending->candidates}, order};
  validate_response(r);
  apply(decompose_ranking(r), order);
  return state_.cycle;
}

void ActiveEmbedder::apply(std::vector<PairedComparison> comparisons, std::vector<std::size_t> response) {
  const auto& cfg = state_.config;
  state_.store.append(comparisons);

  CycleRecord rec;
  rec.query = *state_.pending;
  rec.response = std::move(response);
  rec.mi = state_.pending_mi;
  rec.mu = state_.pending_mu;
  rec.sigma2 = state_.pending_sigma2;
  state_.pending.reset();

  if (phase() == LoopPhase::burn_in) {
    ++state_.burn_in_answered;
    if (state_.burn_in_answered == cfg.burn_in) {
      state_.z = mds_fit(state_.z, state_.store, cfg.mds, 0, &rec.fit);
      rec.fitted = true;
    }
  } else {
    ++state_.cycle;
    state_.z = mds_fit(state_.z, state_.store, cfg.mds, state_.cycle, &rec.fit);
    rec.fitted = true;
    rec.cycle = state_.cycle;
  }
  state_.history.push_back(std::move(rec));
}

namespace {

void answer_pending(ActiveEmbedder& e, Oracle& oracle, Rng& oracle_rng) {
  const NNQuery q = e.next_query();
  if (e.config().family == QueryFamily::ranking) {
    e.submit_ranking(oracle.answer_ranking({q.reference, q.candidates}, oracle_rng).order);
  } else {
    e.submit_nn(oracle.answer_nn(q, oracle_rng).winner);
  }
}

}  // namespace

Trajectory active_embed_loop(const ActiveLoopConfig& cfg, Oracle& oracle, Rng& oracle_rng, const MetricFn& metrics) {
  ActiveEmbedder e(cfg);
  Trajectory t;
  auto snapshot = [&](std::optional<NNQuery> q) {
    TrajectoryPoint p{e.cycle(), e.embedding(), std::move(q), {}};
    if (metrics) p.metrics = metrics(e.embedding());
    t.points.push_back(std::move(p));
  };

  while (e.phase() == LoopPhase::burn_in) answer_pending(e, oracle, oracle_rng);
  snapshot(std::nullopt);
  while (!e.finished()) {
    const NNQuery q = e.next_query();
    answer_pending(e, oracle, oracle_rng);
    snapshot(q);
  }
  t.records = e.history();
  return t;
}

std::vector<PoolLoopPoint> pool_batch_loop(std::size_t n_items, QueryPool pool, const PoolLoopConfig& cfg,
                                           Oracle& oracle, Rng& oracle_rng, const MetricFn& metrics) {
  validate_batch_config(cfg.batch);
  validate_mi_config(cfg.mi);
  validate_mds_config(cfg.mds);
  if (cfg.burn_in < 1) throw std::invalid_argument("pool loop needs at least one burn-in query");
  for (const auto& q : pool.queries) validate_query(q, n_items);

  Rng rng(derive_seed(cfg.seed, 0));
  Embedding z = uniform_init(n_items, cfg.dim, rng);
  ComparisonStore store;
  std::vector<PoolLoopPoint> out;
  std::size_t asked = 0;

  auto ask = [&](const NNQuery& q) {
    const auto cs = decompose_nn(oracle.answer_nn(q, oracle_rng));
    store.append(cs);
    ++asked;
  };
  auto remove_indices = [&](std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end(), std::greater<>());
    for (auto i : idx) pool.queries.erase(pool.queries.begin() + static_cast<std::ptrdiff_t>(i));
  };
  auto record = [&](int batch, const FitReport& fit) {
    PoolLoopPoint p{batch, asked, store.size(), {}, fit.step_halvings};
    if (metrics) p.metrics = metrics(z);
    out.push_back(std::move(p));
  };

  if (pool.size() < static_cast<std::size_t>(cfg.burn_in)) throw std::invalid_argument("pool smaller than burn-in");
  {
    MIScores flat{std::vector<double>(pool.size(), 0.0)};
    const auto picks = select_batch_top_random(flat, {static_cast<std::size_t>(cfg.burn_in), 0}, rng);
    for (auto i : picks) ask(pool.queries[i]);
    remove_indices(picks);
    FitReport fit;
    z = mds_fit(z, store, cfg.mds, 0, &fit);
    record(0, fit);
  }

  for (int b = 1; b <= cfg.batches; ++b) {
    if (pool.size() < cfg.batch.batch_size) break;
    MIScores scores{std::vector<double>(pool.size(), 0.0)};
    if (cfg.batch.top_count > 0) {
      MIConfig mi = cfg.mi;
      mi.seed = derive_seed(cfg.mi.seed, static_cast<std::uint64_t>(b));
      scores = score_pool(z, pool, mi, cfg.mi_mu);
    }
    const auto picks = select_batch_top_random(scores, cfg.batch, rng);
    for (auto i : picks) ask(pool.queries[i]);
    remove_indices(picks);
    FitReport fit;
    z = mds_fit(z, store, cfg.mds, b, &fit);
    record(b, fit);
  }
  return out;
}

}  // namespace infonn
