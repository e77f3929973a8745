#pragma once

#include "infonn/session.hpp"

#include <memory>
#include <string>

namespace infonn {

/// JSON-over-HTTP front end for a SessionManager:
///   POST /sessions                    -> {"session_id"}
///   GET  /sessions/{id}/next-query
///   POST /sessions/{id}/responses     body {"winner": k}
///   GET  /sessions/{id}/snapshot
/// Errors come back as {"error": message} with 400 (bad request),
/// 404 (unknown session) or 409 (no pending query).
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions);
  ~HttpService();

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace infonn
