#include "infonn/server.hpp"

#include <httplib.h>

namespace infonn {

using nlohmann::json;

struct HttpService::Impl {
  SessionManager& sessions;
  httplib::Server server;

  explicit Impl(SessionManager& s) : sessions(s) {}
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      reply(res, 200, f(req));
    } catch (const SessionNotFound& e) {
      reply(res, 404, {{"error", e.what()}});
    } catch (const SessionConflict& e) {
      reply(res, 409, {{"error", e.what()}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    } catch (const std::invalid_argument& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const std::logic_error& e) {
      reply(res, 409, {{"error", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  };
}

json body_of(const httplib::Request& req) { return req.body.empty() ? json::object() : json::parse(req.body); }

}  // namespace

HttpService::HttpService(SessionManager& sessions) : impl_(std::make_unique<Impl>(sessions)) {
  auto& srv = impl_->server;
  auto& mgr = impl_->sessions;

  // The browser client is served from another origin.
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Post("/sessions", guarded([&mgr](const httplib::Request& req) {
             return json{{"session_id", mgr.create_session(body_of(req))}};
           }));
  srv.Get(R"(/sessions/([^/]+)/next-query)",
          guarded([&mgr](const httplib::Request& req) { return mgr.next_query(req.matches[1]); }));
  srv.Post(R"(/sessions/([^/]+)/responses)", guarded([&mgr](const httplib::Request& req) {
             return mgr.submit_response(req.matches[1], body_of(req));
           }));
  srv.Get(R"(/sessions/([^/]+)/snapshot)",
          guarded([&mgr](const httplib::Request& req) { return mgr.snapshot(req.matches[1]); }));
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  auto& srv = impl_->server;
  if (port == 0) {
    const int p = srv.bind_to_any_port(host);
    if (p < 0) throw std::runtime_error("cannot bind " + host);
    return p;
  }
  if (!srv.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace infonn
