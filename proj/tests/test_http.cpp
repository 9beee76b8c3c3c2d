#include <gtest/gtest.h>

#include <map>
#include <set>
#include <thread>

#include "prefelicit/http_api.hpp"
#include "prefelicit/io.hpp"
#include "support.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include <httplib.h>

using namespace prefelicit;
using nlohmann::json;

namespace {

const json kQuickConfig = json::parse(R"({
  "fit": {"max_iters": 30, "grad_samples": 200},
  "mcts_budget": 10,
  "selection": {"refit": {"max_iters": 10, "grad_samples": 50}, "predictive_samples": 200},
  "metric_samples": 300,
  "seed": 4
})");

json create_body(int horizon = 3) {
  return {{"table", to_json(support::unit_table({{0.9, 0.6}, {0.2, 0.8}, {0.6, 0.3}, {0.5, 0.4}}))},
          {"horizon", horizon},
          {"config", kQuickConfig}};
}

class Api : public ::testing::Test {
 protected:
  SessionManager manager{{{}, 1, 0}};

  ApiResponse call(const std::string& method, const std::string& path, const json& body = nullptr) {
    return handle_request(manager, method, path, body.is_null() ? std::string() : body.dump());
  }

  std::set<std::string> fields(const ApiResponse& r) {
    std::set<std::string> out;
    for (const auto& f : r.body.value("fields", json::array())) out.insert(f.at("field").get<std::string>());
    return out;
  }
};

}  // namespace

TEST_F(Api, HealthAndListing) {
  EXPECT_EQ(call("GET", "/health").status, 200);
  const auto r = call("GET", "/sessions");
  EXPECT_EQ(r.status, 200);
  EXPECT_TRUE(r.body.at("sessions").empty());
}

TEST_F(Api, CreateGetAnswerExportRoundTrip) {
  const auto created = call("POST", "/sessions", create_body(3));
  ASSERT_EQ(created.status, 201) << created.body.dump();
  const std::string id = created.body.at("id");
  EXPECT_EQ(created.body.at("status"), "awaiting_answer");
  EXPECT_EQ(call("GET", "/sessions").body.at("sessions"), json::array({id}));

  std::set<std::pair<int, int>> asked;
  for (int round = 1; round <= 3; ++round) {
    const auto view = call("GET", "/sessions/" + id + "?poll=1");
    ASSERT_EQ(view.status, 200);
    EXPECT_EQ(view.body.at("round"), round);
    const auto pair = view.body.at("question").at("pair");
    EXPECT_TRUE(asked.insert({pair[0].get<int>(), pair[1].get<int>()}).second);
    // Alternatives may be named by id.
    const auto ids = view.body.at("alternatives");
    const auto r = call("POST", "/sessions/" + id + "/answer",
                        {{"preferred", ids[pair[1].get<std::size_t>()]},
                         {"other", pair[0]},
                         {"idempotency_key", "r" + std::to_string(round)}});
    EXPECT_EQ(r.status, 200) << r.body.dump();  // inline workers settle before replying
    EXPECT_EQ(r.body.at("answered"), round);
  }
  const auto done = call("GET", "/sessions/" + id);
  EXPECT_EQ(done.body.at("status"), "done");
  EXPECT_TRUE(done.body.at("question").is_null());
  EXPECT_EQ(done.body.at("metric_history").size(), 4u);
  const auto exported = call("GET", "/sessions/" + id + "/export");
  ASSERT_EQ(exported.status, 200);
  EXPECT_EQ(exported.body.at("statements").size(), 3u);
  EXPECT_EQ(exported.body.at("seeds").at("session"), 4u);
  EXPECT_TRUE(exported.body.contains("theta"));
  EXPECT_TRUE(exported.body.contains("config"));
}

TEST_F(Api, CreateAcceptsCsvWithDatasetConfig) {
  json body = create_body(2);
  body.erase("table");
  body["csv"] = "id,price,comfort\nx,100,3\ny,80,2\nz,120,5\n";
  body["dataset_config"] = {{"criteria", {{{"name", "price"}, {"direction", "cost"}}}}};
  const auto r = call("POST", "/sessions", body);
  ASSERT_EQ(r.status, 201) << r.body.dump();
  const auto view = call("GET", "/sessions/" + r.body.at("id").get<std::string>());
  EXPECT_EQ(view.body.at("alternatives"), json::array({"x", "y", "z"}));
  EXPECT_EQ(view.body.at("criteria")[0].at("scale_max"), -80.0);
}

TEST_F(Api, ValidationErrorsCarryFields) {
  auto r = call("POST", "/sessions", json::object());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error"), "validation");
  EXPECT_EQ(fields(r), (std::set<std::string>{"horizon", "table"}));

  json body = create_body(0);
  body["config"]["mcts_budget"] = 0;
  r = call("POST", "/sessions", body);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(fields(r), (std::set<std::string>{"config.mcts_budget"}));

  r = call("POST", "/sessions", create_body(0));
  EXPECT_EQ(fields(r), (std::set<std::string>{"horizon"}));

  body = create_body(2);
  body.erase("table");
  body["csv"] = "id,g1\na,1\nb,oops\nc\n";
  r = call("POST", "/sessions", body);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(fields(r), (std::set<std::string>{"line 3", "line 4"}));
  EXPECT_TRUE(call("GET", "/sessions").body.at("sessions").empty());

  const std::string id = call("POST", "/sessions", create_body(2)).body.at("id");
  r = call("POST", "/sessions/" + id + "/answer", {{"preferred", 9}, {"other", "nobody"}, {"idempotency_key", 3}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(fields(r), (std::set<std::string>{"preferred", "other", "idempotency_key"}));
  r = call("POST", "/sessions/" + id + "/answer", json::object());
  EXPECT_EQ(fields(r), (std::set<std::string>{"preferred", "other"}));
}

TEST_F(Api, MalformedJsonNotFoundMethodAndConflict) {
  auto r = handle_request(manager, "POST", "/sessions", "{\"horizon\": ");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error"), "bad_request");
  EXPECT_EQ(handle_request(manager, "POST", "/sessions", "[1, 2]").status, 400);

  EXPECT_EQ(call("GET", "/sessions/nope").status, 404);
  EXPECT_EQ(call("GET", "/sessions/nope/export").status, 404);
  EXPECT_EQ(call("POST", "/sessions/nope/answer", {{"preferred", 0}, {"other", 1}}).status, 404);
  EXPECT_EQ(call("GET", "/elsewhere").status, 404);
  EXPECT_EQ(call("GET", "/sessions/a/b/c").status, 404);
  EXPECT_EQ(call("DELETE", "/sessions").status, 405);

  const std::string id = call("POST", "/sessions", create_body(1)).body.at("id");
  const auto pair = call("GET", "/sessions/" + id).body.at("question").at("pair");
  const int a = pair[0];
  const int b = pair[1];
  int outsider = 0;
  while (outsider == a || outsider == b) ++outsider;
  r = call("POST", "/sessions/" + id + "/answer", {{"preferred", a}, {"other", outsider}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body.at("error"), "conflict");

  EXPECT_EQ(call("POST", "/sessions/" + id + "/answer", {{"preferred", a}, {"other", b}, {"idempotency_key", "k"}}).status, 200);
  // Same key, same answer: replayed; same key, other answer: conflict; after done: conflict.
  EXPECT_EQ(call("POST", "/sessions/" + id + "/answer", {{"preferred", a}, {"other", b}, {"idempotency_key", "k"}}).status, 200);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/answer", {{"preferred", b}, {"other", a}, {"idempotency_key", "k"}}).status, 409);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/answer", {{"preferred", a}, {"other", b}}).status, 409);
}

TEST(ApiAsync, AnswerReturns202WhileFitting) {
  SessionManager manager({{}, 1, 1});
  auto r = handle_request(manager, "POST", "/sessions", create_body(2).dump());
  ASSERT_EQ(r.status, 201);
  const std::string id = r.body.at("id");
  const auto s = manager.wait_settled(id);
  json answer{{"preferred", s->pending->first}, {"other", s->pending->second}};
  r = handle_request(manager, "POST", "/sessions/" + id + "/answer", answer.dump());
  EXPECT_TRUE(r.status == 202 || r.status == 200);
  if (r.status == 202) {
    EXPECT_TRUE(r.body.at("status") == "fitting" || r.body.at("status") == "selecting");
  }
  EXPECT_EQ(r.body.at("answered"), 1);
  EXPECT_EQ(manager.wait_settled(id)->status, SessionStatus::awaiting_answer);
}

TEST(Environment, ParsesBindAddressVariants) {
  const auto run = [](std::map<std::string, std::string> env) {
    ServerOptions server;
    SessionManagerOptions manager;
    apply_environment(server, manager, [&](const char* k) -> const char* {
      const auto it = env.find(k);
      return it == env.end() ? nullptr : it->second.c_str();
    });
    return std::make_pair(server, manager);
  };
  auto [s0, m0] = run({});
  EXPECT_EQ(s0.host, "127.0.0.1");
  EXPECT_EQ(s0.port, 8080);
  EXPECT_EQ(run({{"PREFELICIT_BIND_ADDRESS", "0.0.0.0"}}).first.host, "0.0.0.0");
  auto hp = run({{"PREFELICIT_BIND_ADDRESS", "example.org:9000"}}).first;
  EXPECT_EQ(hp.host, "example.org");
  EXPECT_EQ(hp.port, 9000);
  auto v6 = run({{"PREFELICIT_BIND_ADDRESS", "[::1]:7000"}}).first;
  EXPECT_EQ(v6.host, "::1");
  EXPECT_EQ(v6.port, 7000);
  auto bare6 = run({{"PREFELICIT_BIND_ADDRESS", "[::]"}}).first;
  EXPECT_EQ(bare6.host, "::");
  EXPECT_EQ(bare6.port, 8080);
  EXPECT_EQ(run({{"PREFELICIT_BIND_ADDRESS", "::1"}}).first.host, "::1");
  auto [s, m] = run({{"PREFELICIT_PORT", "0"},
                     {"PREFELICIT_CORS_ORIGIN", "http://localhost:5173"},
                     {"PREFELICIT_DATA_DIR", "/tmp/sessions"},
                     {"PREFELICIT_SERVER_SEED", "18446744073709551615"},
                     {"PREFELICIT_WORKERS", "3"}});
  EXPECT_EQ(s.port, 0);
  EXPECT_EQ(s.cors_origin, "http://localhost:5173");
  EXPECT_EQ(m.data_dir, "/tmp/sessions");
  EXPECT_EQ(m.server_seed, 18446744073709551615ULL);
  EXPECT_EQ(m.workers, 3);
  EXPECT_THROW(run({{"PREFELICIT_PORT", "80x"}}), std::invalid_argument);
  EXPECT_THROW(run({{"PREFELICIT_SERVER_SEED", "-1"}}), std::invalid_argument);
  EXPECT_THROW(run({{"PREFELICIT_BIND_ADDRESS", "host:http"}}), std::invalid_argument);
  EXPECT_THROW(run({{"PREFELICIT_BIND_ADDRESS", "[::1]:-5"}}), std::invalid_argument);
}

TEST(Server, ServesJsonWithCors) {
  SessionManager manager({{}, 1, 0});
  ServerOptions options;
  options.port = 0;
  options.cors_origin = "http://ui.example";
  HttpServer server(manager, options);
  const int port = server.bind();
  ASSERT_GT(port, 0);
  std::thread loop([&] { server.run(); });

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "http://ui.example");
  EXPECT_EQ(health->get_header_value("Content-Type"), "application/json");

  auto preflight = client.Options("/sessions");
  ASSERT_TRUE(preflight);
  EXPECT_EQ(preflight->status, 204);
  EXPECT_NE(preflight->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
  EXPECT_EQ(preflight->get_header_value("Access-Control-Allow-Headers"), "Content-Type");

  auto created = client.Post("/sessions", create_body(2).dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const std::string id = json::parse(created->body).at("id");
  auto view = client.Get("/sessions/" + id);
  ASSERT_TRUE(view);
  EXPECT_EQ(json::parse(view->body).at("status"), "awaiting_answer");

  auto bad = client.Post("/sessions", "{nope", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(bad->get_header_value("Access-Control-Allow-Origin"), "http://ui.example");
  auto missing = client.Get("/sessions/zzz");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  server.stop();
  loop.join();
}
