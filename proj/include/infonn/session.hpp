#pragma once

#include "infonn/active_embed.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <mutex>

namespace infonn {

class SessionNotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Request is valid but the session cannot take it now (no pending query,
/// loop finished).
class SessionConflict : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Display metadata for one item.
struct ItemInfo {
  std::size_t index = 0;
  std::string id;
  std::string name;
};

/// Where the items come from: an ingested feature table (ids and names are
/// shown to the annotator) or a bare item count.
struct DatasetRef {
  std::optional<std::string> features_path;
  std::size_t n_items = 0;
};

struct SessionState {
  std::string id;
  DatasetRef dataset;
  ActiveEmbedderState embedder;
};

nlohmann::json active_config_to_json(const ActiveLoopConfig& cfg);
ActiveLoopConfig active_config_from_json(const nlohmann::json& j, ActiveLoopConfig base = {});
nlohmann::json session_state_to_json(const SessionState& s);
SessionState session_state_from_json(const nlohmann::json& j);

/// Rows of the centered embedding projected on its top-2 principal axes.
/// Each axis is oriented so its largest-magnitude loading is positive.
Eigen::MatrixX2d principal_projection(const Embedding& z);

/// Session registry. Every mutation is persisted to `<state_dir>/<id>.json`
/// before the call returns; unknown ids are looked up on disk, so a restarted
/// manager resumes where the old one stopped.
class SessionManager {
 public:
  explicit SessionManager(std::optional<std::filesystem::path> state_dir = std::nullopt);
  ~SessionManager();

  /// Body: {"config": {...ActiveLoopConfig fields}, "dataset": {"features_path"|"n_items"}}.
  std::string create_session(const nlohmann::json& request);
  /// {"session_id", "cycle", "phase", "finished", "query": {reference, candidates}} with item metadata.
  nlohmann::json next_query(const std::string& id);
  /// Body: {"winner": k} (1-based) or {"order": [...]} for ranking sessions.
  nlohmann::json submit_response(const std::string& id, const nlohmann::json& body);
  /// {"session_id", "cycle", "items", "projection": [[x, y], ...], "metrics": {...series}}.
  nlohmann::json snapshot(const std::string& id);

  SessionState state(const std::string& id);

 private:
  struct Session;
  Session& find(const std::string& id);
  void persist(const Session& s) const;

  std::optional<std::filesystem::path> state_dir_;
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::size_t next_id_ = 1;
};

}  // namespace infonn
