#include "infonn/server.hpp"
#include "infonn/session.hpp"

#include "test_support.hpp"

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <unistd.h>

using namespace infonn;
using nlohmann::json;

namespace {

ActiveLoopConfig loop_config() {
  ActiveLoopConfig c;
  c.n_items = 9;
  c.dim = 2;
  c.query_length = 3;
  c.burn_in = 6;
  c.cycles = 4;
  c.mi = {MIVariant::distances, 1.0, 30, 4};
  c.mds.iterations = 60;
  c.seed = 3;
  return c;
}

json create_body() { return {{"config", active_config_to_json(loop_config())}}; }

std::filesystem::path fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("infonn-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  return p;
}

NNQuery query_of(const json& next) {
  NNQuery q{ItemId{next.at("query").at("reference").at("index").get<std::size_t>()}, {}};
  for (const auto& c : next.at("query").at("candidates")) q.candidates.push_back(ItemId{c.at("index").get<std::size_t>()});
  return q;
}

class RunningServer {
 public:
  explicit RunningServer(SessionManager& m) : service_(m) {
    port_ = service_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_.run(); });
  }
  ~RunningServer() {
    service_.stop();
    thread_.join();
  }
  int port() const { return port_; }

 private:
  HttpService service_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("driving the HTTP API reproduces the in-process loop") {
  const Embedding truth = testing::random_embedding(9, 2, 77);
  DeterministicOracle oracle(GroundTruth::from_embedding(truth));
  Rng orng(0);
  const auto direct = active_embed_loop(loop_config(), oracle, orng);

  SessionManager manager;
  RunningServer server(manager);
  httplib::Client cli("127.0.0.1", server.port());

  auto created = cli.Post("/sessions", create_body().dump(), "application/json");
  REQUIRE(created);
  REQUIRE(created->status == 200);
  const std::string id = json::parse(created->body).at("session_id");

  std::vector<NNQuery> asked;
  for (int guard = 0; guard < 100; ++guard) {
    auto res = cli.Get("/sessions/" + id + "/next-query");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const json next = json::parse(res->body);
    if (next.at("finished").get<bool>()) break;
    const NNQuery q = query_of(next);
    auto again = cli.Get("/sessions/" + id + "/next-query");
    CHECK(query_of(json::parse(again->body)) == q);
    asked.push_back(q);
    const std::size_t w = oracle.answer_nn(q, orng).winner;
    auto sub = cli.Post("/sessions/" + id + "/responses", json{{"winner", w}}.dump(), "application/json");
    REQUIRE(sub);
    CHECK(sub->status == 200);
  }
  CHECK(asked.size() == 10);
  CHECK(manager.state(id).embedder.z == direct.points.back().z);
  for (std::size_t i = 0; i < direct.records.size(); ++i) CHECK(direct.records[i].query == asked[i]);

  auto snap = cli.Get("/sessions/" + id + "/snapshot");
  REQUIRE(snap);
  const json s = json::parse(snap->body);
  CHECK(s.at("cycle") == 4);
  CHECK(s.at("projection").size() == 9);
  CHECK(s.at("items").size() == 9);
  CHECK(s.at("metrics").at("cycle") == json::array({0, 1, 2, 3, 4}));
  CHECK(s.at("metrics").at("comparisons").back() == 20);
  CHECK(snap->get_header_value("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("HTTP error statuses") {
  SessionManager manager;
  RunningServer server(manager);
  httplib::Client cli("127.0.0.1", server.port());
  const std::string id = json::parse(cli.Post("/sessions", create_body().dump(), "application/json")->body).at("session_id");

  CHECK(cli.Get("/sessions/session-999/next-query")->status == 404);
  CHECK(cli.Get("/sessions/nope/snapshot")->status == 404);
  CHECK(cli.Post("/sessions/" + id + "/responses", R"({"winner":1})", "application/json")->status == 409);

  const json first = json::parse(cli.Get("/sessions/" + id + "/next-query")->body);
  const auto before = manager.state(id).embedder;
  for (const char* bad : {R"({"winner":0})", R"({"winner":4})", R"({"winner":"2"})", R"({})", "not json"}) {
    auto r = cli.Post("/sessions/" + id + "/responses", bad, "application/json");
    CHECK(r->status == 400);
    CHECK(json::parse(r->body).contains("error"));
  }
  const auto after = manager.state(id).embedder;
  CHECK(after.store.size() == before.store.size());
  CHECK(after.pending == before.pending);
  CHECK(json::parse(cli.Get("/sessions/" + id + "/next-query")->body) == first);
  CHECK(cli.Post("/sessions", R"({"config":{"query_length":1}})", "application/json")->status == 400);
  CHECK(cli.Options("/sessions")->status == 204);
}

TEST_CASE("sessions resume from the state directory") {
  const auto dir = fresh_dir("resume");
  const Embedding truth = testing::random_embedding(9, 2, 5);
  DeterministicOracle oracle(GroundTruth::from_embedding(truth));
  Rng orng(0);
  std::string id;
  json pending_query;
  {
    SessionManager a(dir);
    id = a.create_session(create_body());
    for (int i = 0; i < 8; ++i) a.submit_response(id, {{"winner", oracle.answer_nn(query_of(a.next_query(id)), orng).winner}});
    pending_query = a.next_query(id);
  }
  {
    SessionManager b(dir);
    CHECK(b.next_query(id) == pending_query);
    b.submit_response(id, {{"winner", 1}});
    CHECK(b.create_session(create_body()) == "session-2");
  }
  // A restart with no query pending draws the same next query as an uninterrupted run.
  SessionManager c(dir);
  const json resumed = c.next_query(id);
  SessionManager mem;
  const std::string mid = mem.create_session(create_body());
  Rng orng2(0);
  for (int i = 0; i < 8; ++i) mem.submit_response(mid, {{"winner", oracle.answer_nn(query_of(mem.next_query(mid)), orng2).winner}});
  mem.next_query(mid);
  mem.submit_response(mid, {{"winner", 1}});
  CHECK(query_of(mem.next_query(mid)) == query_of(resumed));
  CHECK(mem.state(mid).embedder.z == c.state(id).embedder.z);

  const json stored = json::parse(std::ifstream(dir / (id + ".json")));
  CHECK(session_state_to_json(session_state_from_json(stored)) == stored);
  CHECK_THROWS_AS(c.next_query("../etc/passwd"), SessionNotFound);
  std::filesystem::remove_all(dir);
}

TEST_CASE("finished sessions and ranking sessions") {
  SessionManager m;
  auto body = create_body();
  body["config"]["cycles"] = 0;
  body["config"]["burn_in"] = 1;
  const std::string id = m.create_session(body);
  m.next_query(id);
  CHECK(m.submit_response(id, {{"winner", 2}}).at("finished") == true);
  CHECK(m.next_query(id).at("finished") == true);
  CHECK_FALSE(m.next_query(id).contains("query"));
  CHECK_THROWS_AS(m.submit_response(id, {{"winner", 1}}), SessionConflict);

  auto rb = create_body();
  rb["config"]["family"] = "ranking";
  const std::string rid = m.create_session(rb);
  CHECK(m.next_query(rid).at("family") == "ranking");
  CHECK_THROWS(m.submit_response(rid, {{"winner", 1}}));
  CHECK(m.submit_response(rid, {{"order", {2, 3, 1}}}).at("accepted") == true);
}

TEST_CASE("sessions over an ingested feature table carry item metadata") {
  const auto dir = fresh_dir("items");
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "items.csv");
    f << "id,name,x\n";
    for (int i = 0; i < 6; ++i) f << "food" << i << ",Dish " << i << "," << i << "\n";
  }
  SessionManager m;
  json body = create_body();
  body["dataset"] = {{"features_path", (dir / "items.csv").string()}};
  const std::string id = m.create_session(body);
  const json q = m.next_query(id);
  const auto& ref = q.at("query").at("reference");
  CHECK(ref.at("id") == "food" + std::to_string(ref.at("index").get<int>()));
  CHECK(ref.at("name") == "Dish " + std::to_string(ref.at("index").get<int>()));
  CHECK(m.snapshot(id).at("items").size() == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("projection follows the sign convention") {
  Embedding line(4, 2);
  line << 0, 0, -1, 2, -2, 4, 1, -2;
  const Eigen::MatrixX2d p = principal_projection(line);
  const Eigen::Vector2d axis = Eigen::Vector2d(-1, 2).normalized();
  const Embedding centered = line.rowwise() - line.colwise().mean();
  CHECK((p.col(0) - centered * axis).norm() <= 1e-12);
  CHECK(p.col(1).norm() <= 1e-12);

  const Embedding z = testing::random_embedding(12, 3, 8);
  const Eigen::MatrixX2d a = principal_projection(z), b = principal_projection(Embedding(-z));
  CHECK((a + b).norm() <= 1e-9);
  const Embedding moved = (z * testing::random_rotation(3, 2)).rowwise() + Eigen::RowVector3d(4, 5, 6);
  CHECK((principal_projection(moved).cwiseAbs() - a.cwiseAbs()).norm() <= 1e-9);
}
