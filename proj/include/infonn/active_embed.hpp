#pragma once

#include "infonn/batch.hpp"
#include "infonn/mds.hpp"
#include "infonn/mutual_info.hpp"
#include "infonn/oracle.hpp"

#include <functional>
#include <map>
#include <string>

namespace infonn {

enum class QueryFamily { nearest_neighbor, ranking };
enum class SelectionRule { info_nn, random };
enum class SigmaMode { fixed, data_driven };

struct ActiveLoopConfig {
  std::size_t n_items = 20;
  std::size_t dim = 2;
  std::size_t query_length = 3;  // C, number of candidates
  int cycles = 100;              // K
  int burn_in = 20;              // K_0
  std::optional<std::size_t> candidate_cap;  // per-reference pool cap
  QueryFamily family = QueryFamily::nearest_neighbor;
  SelectionRule selection = SelectionRule::info_nn;
  MIConfig mi;
  SigmaMode sigma_mode = SigmaMode::data_driven;
  MDSConfig mds;
  std::uint64_t seed = 0;
};

void validate_active_config(const ActiveLoopConfig& cfg);

enum class LoopPhase { burn_in, active };

/// One answered query and what the learner did with it.
struct CycleRecord {
  int cycle = 0;  // 0 during burn-in
  NNQuery query;
  std::vector<std::size_t> response;  // winner (one entry) or full ordering, 1-based
  double mi = 0.0;
  double mu = 0.0;
  double sigma2 = 0.0;
  FitReport fit;
  bool fitted = false;
};

/// Everything needed to resume an ActiveEmbedder exactly.
struct ActiveEmbedderState {
  ActiveLoopConfig config;
  Embedding z;
  ComparisonStore store;
  int burn_in_answered = 0;
  int cycle = 0;  // answered active queries
  std::optional<NNQuery> pending;
  double pending_mi = 0.0;
  double pending_mu = 0.0;
  double pending_sigma2 = 0.0;
  std::string rng_state;
  std::vector<CycleRecord> history;
};

/// The active embedding loop as a resumable state machine: ask next_query(),
/// answer with submit_*(). Burn-in queries are uniform; after the last burn-in
/// answer the embedding is fitted from its uniform init, and every later answer
/// triggers a warm-started fit. next_query() is idempotent while a query is pending.
class ActiveEmbedder {
 public:
  explicit ActiveEmbedder(ActiveLoopConfig cfg);
  explicit ActiveEmbedder(ActiveEmbedderState state);

  const NNQuery& next_query();
  bool has_pending() const { return state_.pending.has_value(); }

  /// Returns the cycle counter after the answer is applied.
  int submit_nn(std::size_t winner);
  int submit_ranking(const std::vector<std::size_t>& order);

  LoopPhase phase() const {
    return state_.burn_in_answered < state_.config.burn_in ? LoopPhase::burn_in : LoopPhase::active;
  }
  bool finished() const { return phase() == LoopPhase::active && state_.cycle >= state_.config.cycles; }
  int cycle() const { return state_.cycle; }
  const Embedding& embedding() const { return state_.z; }
  const ComparisonStore& store() const { return state_.store; }
  const ActiveLoopConfig& config() const { return state_.config; }
  const std::vector<CycleRecord>& history() const { return state_.history; }

  /// Snapshot including the RNG state.
  ActiveEmbedderState state() const;

 private:
  void select_active();
  void apply(std::vector<PairedComparison> comparisons, std::vector<std::size_t> response);

  ActiveEmbedderState state_;
  Rng rng_;
};

using MetricFn = std::function<std::map<std::string, double>(const Embedding&)>;

struct TrajectoryPoint {
  int cycle = 0;
  Embedding z;
  std::optional<NNQuery> query;  // empty for the post-burn-in point
  std::map<std::string, double> metrics;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::vector<CycleRecord> records;
};

/// Runs burn-in plus cfg.cycles active cycles against a simulated oracle.
/// The oracle draws from `oracle_rng`; selection randomness is internal to the
/// loop, so a scripted oracle replaying the same answers reproduces the run.
Trajectory active_embed_loop(const ActiveLoopConfig& cfg, Oracle& oracle, Rng& oracle_rng,
                             const MetricFn& metrics = {});

/// Pool-based batch variant: a fixed candidate pool, K_0 random burn-in
/// queries from it, then `batches` rounds of top-B' + random-fill selection.
/// Answered queries leave the pool.
struct PoolLoopConfig {
  std::size_t dim = 10;
  int burn_in = 20;
  int batches = 20;
  BatchConfig batch;
  MIConfig mi;
  double mi_mu = 1e-5;
  MDSConfig mds;
  std::uint64_t seed = 0;
};

struct PoolLoopPoint {
  int batch = 0;
  std::size_t queries = 0;
  std::size_t comparisons = 0;
  std::map<std::string, double> metrics;
  int step_halvings = 0;
};

std::vector<PoolLoopPoint> pool_batch_loop(std::size_t n_items, QueryPool pool, const PoolLoopConfig& cfg,
                                           Oracle& oracle, Rng& oracle_rng, const MetricFn& metrics = {});

}  // namespace infonn
