#include <thread>

#include "httplib.h"
#include "sinogate/prompt.hpp"
#include "sinogate/tutor.hpp"

namespace sinogate {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& message,
                std::optional<bool> retryable = std::nullopt)
{
    nlohmann::json body{{"error", message}};
    if (retryable) body["retryable"] = *retryable;
    send_json(res, status, body);
}

std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res)
{
    auto j = nlohmann::json::parse(req.body.empty() ? std::string("{}") : req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        send_error(res, 400, "request body must be a JSON object");
        return std::nullopt;
    }
    return j;
}

// Maps service exceptions onto the documented status codes.
template <typename F>
void guarded(httplib::Response& res, F&& body)
{
    try {
        body();
    } catch (const SessionNotFound& e) {
        send_error(res, 404, e.what());
    } catch (const SessionBusy& e) {
        send_error(res, 409, e.what());
    } catch (const UpstreamFailure& e) {
        send_error(res, 502, e.what(), e.retryable());
    } catch (const FixtureMissing& e) {
        send_error(res, 502, e.what(), false);
    } catch (const AuthMissing& e) {
        send_error(res, 502, e.what(), false);
    } catch (const TurnLimit& e) {
        send_error(res, 422, e.what());
    } catch (const Error& e) {
        send_error(res, 400, e.what());
    } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, e.what());
    }
}

} // namespace

struct TutorServer::Impl {
    TutorService& service;
    ServerOptions options;
    httplib::Server server;
    std::thread thread;
    bool bound = false;
    int port = 0;

    Impl(TutorService& s, ServerOptions o) : service(s), options(std::move(o)) { routes(); }

    void routes()
    {
        server.set_default_headers({
            {"Access-Control-Allow-Origin", "*"},
            {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
            {"Access-Control-Allow-Headers", "Content-Type"},
        });
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}});
        });

        server.Get("/api/tasks", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"tasks", tasks_to_json()}});
        });

        server.Get(R"(/api/charsets/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const auto level = parse_level(req.matches[1].str());
            if (!level) {
                send_error(res, 404, "unknown level " + req.matches[1].str());
                return;
            }
            const ThresholdList& list = service.charsets().at(*level);
            auto chars = nlohmann::json::array();
            for (HanChar c : list.characters()) chars.push_back(c.utf8());
            send_json(res, 200, {{"level", to_string(*level)}, {"characters", std::move(chars)}, {"count", list.size()}});
        });

        server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req, res);
            if (!body) return;
            guarded(res, [&] {
                const ThresholdLevel level = level_from_string(body->at("level").get<std::string>());
                std::optional<PromptCondition> condition;
                if (body->contains("condition") && !body->at("condition").is_null()) {
                    condition = condition_from_string(body->at("condition").get<std::string>());
                }
                std::optional<std::string> model;
                if (body->contains("model") && !body->at("model").is_null()) {
                    model = body->at("model").get<std::string>();
                }
                send_json(res, 201, {{"session", to_json(service.create_session(level, condition, model))}});
            });
        });

        server.Post(R"(/api/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req, res);
            if (!body) return;
            guarded(res, [&] {
                const std::string text = body->value("text", std::string());
                const MessageResult r = service.post_message(req.matches[1].str(), text);
                nlohmann::json out{{"reply", r.reply}, {"deviation", to_json(r.deviation)}, {"spans", to_json(r.annotated.spans)}};
                if (r.user_deviation) out["user_deviation"] = to_json(*r.user_deviation);
                send_json(res, 200, out);
            });
        });

        server.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, {{"session", to_json(service.get_session(req.matches[1].str()))}}); });
        });

        server.Delete(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                service.delete_session(req.matches[1].str());
                res.status = 204;
            });
        });

        if (options.static_dir && !server.set_mount_point("/", options.static_dir->string())) {
            throw Error("static directory not found: " + options.static_dir->string());
        }
    }
};

TutorServer::TutorServer(TutorService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options)))
{
}

TutorServer::~TutorServer()
{
    stop();
}

int TutorServer::bind()
{
    auto& s = impl_->server;
    if (impl_->options.port == 0) {
        impl_->port = s.bind_to_any_port(impl_->options.host);
        if (impl_->port < 0) impl_->port = 0;
    } else if (s.bind_to_port(impl_->options.host, impl_->options.port)) {
        impl_->port = impl_->options.port;
    }
    if (impl_->port <= 0) {
        throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    impl_->bound = true;
    return impl_->port;
}

void TutorServer::serve()
{
    if (!impl_->bound) throw Error("TutorServer::serve called before bind");
    impl_->server.listen_after_bind();
}

int TutorServer::start()
{
    const int port = bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void TutorServer::stop()
{
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

} // namespace sinogate
