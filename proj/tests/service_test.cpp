#include "terrarank/service.hpp"

#include <gtest/gtest.h>

#include <httplib.h>

#include <future>
#include <string>
#include <thread>
#include <vector>

#include "test_util.hpp"

namespace terrarank {
namespace {

constexpr const char* kSurveyBody =
    R"({"origin":{"lat":34.861989,"lng":135.675334},"destination":{"lat":34.853106,"lng":135.693976}})";

AppConfig fixture_config(const std::string& name = "config.json") {
  return load_config(testing::slurp(testing::fixture_dir() / name), {}, testing::fixture_dir());
}

std::string error_code(const std::string& body) {
  return nlohmann::json::parse(body)["error"]["code"].get<std::string>();
}

TEST(HandleRankTest, ComfortReportMatchesGolden) {
  const App app(fixture_config());
  const auto reply = handle_rank(app, kSurveyBody);
  EXPECT_EQ(reply.status, 200);
  EXPECT_EQ(reply.body, testing::slurp(testing::golden_dir() / "comfort_report.json"));
}

TEST(HandleRankTest, PreferenceAndAlphaAreHonoured) {
  const App app(fixture_config());
  auto body = nlohmann::json::parse(kSurveyBody);
  body["preference"] = "shortest";
  auto report = parse_report(handle_rank(app, body.dump()).body);
  EXPECT_EQ(report.preference, "shortest");
  EXPECT_EQ(report.routes[0].id, "route0");

  body["preference"] = "comfort";
  body["alpha"] = 0;
  report = parse_report(handle_rank(app, body.dump()).body);
  EXPECT_EQ(report.alpha, 0.0);
  EXPECT_EQ(report.routes[0].id, "route0");

  body.erase("alpha");
  body["k"] = 2;
  report = parse_report(handle_rank(app, body.dump()).body);
  EXPECT_EQ(report.routes.size(), 2u);
}

TEST(HandleRankTest, InvalidCoordinatesAre400) {
  const App app(fixture_config());
  const auto reply =
      handle_rank(app, R"({"origin":{"lat":95,"lng":135.6},"destination":{"lat":34.85,"lng":135.69}})");
  EXPECT_EQ(reply.status, 400);
  EXPECT_EQ(error_code(reply.body), "invalid_coordinates");
  EXPECT_EQ(error_code(handle_rank(app,
                                   R"({"origin":{"lat":34,"lng":181},"destination":{"lat":34.85,"lng":135.69}})")
                           .body),
            "invalid_coordinates");
}

TEST(HandleRankTest, MalformedRequestsAre400) {
  const App app(fixture_config());
  for (const std::string body :
       {"not json", "[]", R"({"origin":{"lat":1,"lng":2}})", R"({"origin":{"lat":"1","lng":2},"destination":{}})",
        R"({"origin":{"lat":1,"lng":2},"destination":{"lat":1.1,"lng":2},"preference":"scenic"})",
        R"({"origin":{"lat":1,"lng":2},"destination":{"lat":1.1,"lng":2},"alpha":-1})",
        R"({"origin":{"lat":1,"lng":2},"destination":{"lat":1.1,"lng":2},"k":0})"}) {
    const auto reply = handle_rank(app, body);
    EXPECT_EQ(reply.status, 400) << body;
    EXPECT_EQ(error_code(reply.body), "invalid_request") << body;
  }
}

TEST(HandleRankTest, IdenticalEndpointsAreNoRoute) {
  const App app(fixture_config());
  const auto reply =
      handle_rank(app, R"({"origin":{"lat":34.86,"lng":135.68},"destination":{"lat":34.86,"lng":135.68}})");
  EXPECT_EQ(reply.status, 404);
  EXPECT_EQ(error_code(reply.body), "no_route");
}

TEST(HandleRankTest, UnreachableProviderIs502AndHidesKey) {
  auto cfg = fixture_config();
  cfg.directions_url = "http://127.0.0.1:1/directions";
  cfg.api_key = "secret-key-123";
  const App app(cfg);
  const auto reply = handle_rank(app, kSurveyBody);
  EXPECT_EQ(reply.status, 502);
  EXPECT_EQ(error_code(reply.body), "upstream_error");
  EXPECT_EQ(reply.body.find("secret-key-123"), std::string::npos);
  EXPECT_EQ(handle_health(app).status, 200);
}

TEST(HandleRankTest, LocalGraphSourceGivesSameComfortOrder) {
  const App app(fixture_config("config_local.json"));
  const auto report = parse_report(handle_rank(app, kSurveyBody).body);
  ASSERT_EQ(report.routes.size(), 3u);
  EXPECT_EQ(report.routes[0].id, "route1");
  EXPECT_EQ(report.routes[1].id, "route0");
  EXPECT_EQ(report.routes[2].id, "route2");
}

TEST(HandleHealthTest, ReportsSources) {
  EXPECT_EQ(handle_health(App(fixture_config())).body,
            R"({"sources":{"elevation":"dem","routes":"file"},"status":"ok"})"
            "\n");
  EXPECT_EQ(handle_health(App(fixture_config("config_local.json"))).body,
            R"({"sources":{"elevation":"dem","routes":"local"},"status":"ok"})"
            "\n");
}

// ---------------------------------------------------------------------------

class LiveServer : public ::testing::Test {
 protected:
  void start(AppConfig cfg) {
    app_ = std::make_unique<App>(std::move(cfg));
    mount_routes(server_, *app_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }

  std::unique_ptr<App> app_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(LiveServer, RankOverHttpMatchesGolden) {
  start(fixture_config());
  auto c = client();
  const auto res = c.Post("/v1/rank", kSurveyBody, "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  EXPECT_EQ(res->body, testing::slurp(testing::golden_dir() / "comfort_report.json"));
}

TEST_F(LiveServer, HealthAndErrorsOverHttp) {
  start(fixture_config());
  auto c = client();
  const auto health = c.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(nlohmann::json::parse(health->body)["status"], "ok");

  const auto bad = c.Post("/v1/rank", R"({"origin":{"lat":95,"lng":0},"destination":{"lat":0,"lng":0}})",
                          "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(error_code(bad->body), "invalid_coordinates");
  EXPECT_FALSE(bad->has_header("Access-Control-Allow-Origin"));
}

TEST_F(LiveServer, CorsHeadersWhenConfigured) {
  auto cfg = fixture_config();
  cfg.cors_origin = "http://localhost:5173";
  start(cfg);
  auto c = client();
  const auto pre = c.Options("/v1/rank");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_EQ(pre->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
  EXPECT_NE(pre->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);
  const auto health = c.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
}

TEST_F(LiveServer, ConcurrentRequestsGetIdenticalBodies) {
  start(fixture_config());
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 8; ++i) {
    futures.push_back(std::async(std::launch::async, [this] {
      auto c = client();
      const auto res = c.Post("/v1/rank", kSurveyBody, "application/json");
      return res && res->status == 200 ? res->body : std::string("failed");
    }));
  }
  const auto golden = testing::slurp(testing::golden_dir() / "comfort_report.json");
  for (auto& f : futures) EXPECT_EQ(f.get(), golden);
}

TEST(AppTest, RemoteElevationAndCacheSourceNames) {
  auto cfg = load_config(R"({"elevation_url":"file://elevation_mock.json","graph_path":"road_graph.json"})", {},
                         testing::fixture_dir());
  EXPECT_EQ(App(cfg).elevation_source(), "remote");
  EXPECT_EQ(App(cfg).route_source(), "local");
}

TEST(AppTest, CacheIsPersistedAfterRanking) {
  const auto dir = std::filesystem::temp_directory_path() / "terrarank_service_cache";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto cfg = fixture_config("config_local.json");
  cfg.cache_path = (dir / "cache.csv").string();
  const App app(cfg);
  EXPECT_EQ(app.elevation_source(), "dem");
  const auto first = handle_rank(app, kSurveyBody);
  app.save_cache();
  ASSERT_TRUE(std::filesystem::exists(dir / "cache.csv"));
  const App warm(cfg);
  EXPECT_EQ(handle_rank(warm, kSurveyBody).body, first.body);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace terrarank
