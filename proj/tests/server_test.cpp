#include <gtest/gtest.h>

#include <fstream>

#include "fakes.hpp"
#include "httplib.h"
#include "sinogate/tutor.hpp"
#include "temp_dir.hpp"

using namespace sinogate;

namespace {

struct Server {
    std::shared_ptr<fakes::ScriptedPoster::State> state = std::make_shared<fakes::ScriptedPoster::State>();
    LlmClient client;
    SessionStore store;
    CharsetRegistry charsets;
    TutorService service;
    TutorServer server;
    int port = 0;

    explicit Server(std::optional<std::filesystem::path> static_dir = std::nullopt)
        : client(fakes::test_config(), TransportMode::live, std::nullopt,
                 std::make_unique<fakes::ScriptedPoster>(state), [](std::chrono::milliseconds) {}),
          service(client, store, charsets, TutorConfig{}),
          server(service, ServerOptions{"127.0.0.1", 0, std::move(static_dir)})
    {
        state->fallback = {200, fakes::completion_body("你好愉快"), std::nullopt};
        port = server.start();
    }
    ~Server() { server.stop(); }

    httplib::Client http() const { return httplib::Client("127.0.0.1", port); }
};

} // namespace

TEST(Server, Health)
{
    Server s;
    auto res = s.http().Get("/healthz");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
}

TEST(Server, TasksAndCharsets)
{
    Server s;
    auto cli = s.http();
    auto tasks = cli.Get("/api/tasks");
    ASSERT_TRUE(tasks);
    EXPECT_EQ(nlohmann::json::parse(tasks->body)["tasks"].size(), 10u);
    auto cs = cli.Get("/api/charsets/A1");
    ASSERT_TRUE(cs);
    const auto j = nlohmann::json::parse(cs->body);
    EXPECT_EQ(j["count"], 249);
    EXPECT_EQ(j["characters"].size(), 249u);
    auto bad = cli.Get("/api/charsets/B7");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 404);
}

TEST(Server, SessionLifecycle)
{
    Server s;
    auto cli = s.http();
    auto created = cli.Post("/api/sessions", R"({"level":"A1","condition":"with_list"})", "application/json");
    ASSERT_TRUE(created);
    ASSERT_EQ(created->status, 201);
    const auto id = nlohmann::json::parse(created->body)["session"]["id"].get<std::string>();

    auto msg = cli.Post("/api/sessions/" + id + "/messages", R"({"text":"RW2"})", "application/json");
    ASSERT_TRUE(msg);
    ASSERT_EQ(msg->status, 200);
    const auto body = nlohmann::json::parse(msg->body);
    EXPECT_EQ(body["reply"], "你好愉快");
    EXPECT_DOUBLE_EQ(body["deviation"]["out_ratio"].get<double>(), 0.25);
    ASSERT_EQ(body["spans"].size(), 1u);
    EXPECT_EQ(body["spans"][0]["start"], 2);
    EXPECT_EQ(body["spans"][0]["end"], 3);
    EXPECT_EQ(body["spans"][0]["char"], "愉");

    auto got = cli.Get("/api/sessions/" + id);
    ASSERT_TRUE(got);
    EXPECT_EQ(nlohmann::json::parse(got->body)["session"]["history"].size(), 3u);

    auto del = cli.Delete("/api/sessions/" + id);
    ASSERT_TRUE(del);
    EXPECT_EQ(del->status, 204);
    auto gone = cli.Get("/api/sessions/" + id);
    ASSERT_TRUE(gone);
    EXPECT_EQ(gone->status, 404);
}

TEST(Server, ErrorMapping)
{
    Server s;
    auto cli = s.http();
    auto missing = cli.Post("/api/sessions/nope/messages", R"({"text":"hi"})", "application/json");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    auto bad_json = cli.Post("/api/sessions", "[1,2", "application/json");
    ASSERT_TRUE(bad_json);
    EXPECT_EQ(bad_json->status, 400);

    auto bad_level = cli.Post("/api/sessions", R"({"level":"C2"})", "application/json");
    ASSERT_TRUE(bad_level);
    EXPECT_EQ(bad_level->status, 400);

    const auto id = s.service.create_session(ThresholdLevel::A1).id;
    auto empty = cli.Post("/api/sessions/" + id + "/messages", R"({"text":""})", "application/json");
    ASSERT_TRUE(empty);
    EXPECT_EQ(empty->status, 400);

    s.state->script.push_back({503, "down", std::nullopt});
    s.state->script.push_back({503, "down", std::nullopt});
    s.state->script.push_back({503, "down", std::nullopt});
    s.state->script.push_back({503, "down", std::nullopt});
    s.state->script.push_back({503, "down", std::nullopt});
    auto upstream = cli.Post("/api/sessions/" + id + "/messages", R"({"text":"RW1"})", "application/json");
    ASSERT_TRUE(upstream);
    EXPECT_EQ(upstream->status, 502);
    EXPECT_TRUE(nlohmann::json::parse(upstream->body)["retryable"].get<bool>());
    EXPECT_EQ(s.service.get_session(id).history.size(), 1u);
}

TEST(Server, BusySessionIs409)
{
    Server s;
    const auto id = s.service.create_session(ThresholdLevel::A1).id;
    s.state->hold = std::chrono::milliseconds(400);
    std::thread first([&] {
        auto cli = s.http();
        cli.Post("/api/sessions/" + id + "/messages", R"({"text":"RW1"})", "application/json");
    });
    while (s.state->in_flight.load() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    auto second = s.http().Post("/api/sessions/" + id + "/messages", R"({"text":"RW2"})", "application/json");
    first.join();
    ASSERT_TRUE(second);
    EXPECT_EQ(second->status, 409);
}

TEST(Server, CorsHeadersAndPreflight)
{
    Server s;
    auto cli = s.http();
    auto res = cli.Get("/api/tasks");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
    auto pre = cli.Options("/api/sessions");
    ASSERT_TRUE(pre);
    EXPECT_EQ(pre->status, 204);
    EXPECT_FALSE(pre->get_header_value("Access-Control-Allow-Methods").empty());
}

TEST(Server, ServesStaticBundle)
{
    TempDir dir;
    std::ofstream(dir.path / "index.html") << "<html>tutor</html>";
    Server s(dir.path);
    auto res = s.http().Get("/index.html");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, "<html>tutor</html>");
    auto root = s.http().Get("/");
    ASSERT_TRUE(root);
    EXPECT_EQ(root->status, 200);
}
