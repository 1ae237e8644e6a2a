#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sinogate/analysis.hpp"
#include "sinogate/charset.hpp"
#include "sinogate/llmclient.hpp"
#include "sinogate/task.hpp"

namespace sinogate {

/// Compliance annotation for one turn of a session's history.
struct TurnAnnotation {
    std::size_t turn_index;
    DeviationReport deviation;
    std::vector<HighlightSpan> spans;
};

/// A learner's conversation. history[0] is the system prompt and never
/// changes; after it, user and assistant turns alternate.
struct Session {
    std::string id;
    ThresholdLevel level = ThresholdLevel::A1;
    PromptCondition condition = PromptCondition::with_list;
    std::string model_id;
    std::vector<ChatTurn> history;
    /// One per assistant turn, in order.
    std::vector<TurnAnnotation> annotations;
    /// Learner turns, only when TutorConfig::audit_user_turns is on.
    std::vector<TurnAnnotation> user_annotations;
    std::string created_at;
};

nlohmann::json to_json(const Session& session);
Session session_from_json(const nlohmann::json& j);

class SessionNotFound : public Error {
public:
    explicit SessionNotFound(const std::string& id);
};

class SessionBusy : public Error {
public:
    explicit SessionBusy(const std::string& id);
};

class EmptyMessage : public Error {
public:
    EmptyMessage();
};

class UnknownModel : public Error {
public:
    explicit UnknownModel(const std::string& model);
};

class TurnLimit : public Error {
public:
    explicit TurnLimit(std::size_t cap);
};

/// Sessions in memory, mirrored to one JSON file per session when a
/// directory is given.
class SessionStore {
public:
    explicit SessionStore(std::optional<std::filesystem::path> directory = std::nullopt);

    void put(const Session& session);
    [[nodiscard]] std::optional<Session> get(const std::string& id) const;
    bool erase(const std::string& id);
    [[nodiscard]] std::size_t size() const;

private:
    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mutex_;
    std::map<std::string, Session> sessions_;
};

struct TutorConfig {
    /// Accepted model ids; empty means only default_model.
    std::vector<std::string> models;
    std::string default_model = "gpt-4o";
    PromptCondition default_condition = PromptCondition::with_list;
    /// Maximum number of non-system turns kept in a session.
    std::size_t turn_cap = 50;
    bool audit_user_turns = false;
    GenerationParams params;
};

struct MessageResult {
    std::string reply;
    DeviationReport deviation;
    AnnotatedText annotated;
    std::optional<DeviationReport> user_deviation;
};

class TutorService {
public:
    TutorService(LlmClient& client, SessionStore& store, const CharsetRegistry& charsets, TutorConfig config);

    /// No LLM call; the session starts with the level's system prompt.
    Session create_session(ThresholdLevel level,
                           std::optional<PromptCondition> condition = std::nullopt,
                           std::optional<std::string> model = std::nullopt);

    /// Sends the whole history plus `text`. On any failure the session is left
    /// untouched. A second message while one is in flight throws SessionBusy.
    MessageResult post_message(const std::string& id, const std::string& text);

    [[nodiscard]] Session get_session(const std::string& id) const;
    void delete_session(const std::string& id);

    [[nodiscard]] const TutorConfig& config() const noexcept { return config_; }
    [[nodiscard]] const CharsetRegistry& charsets() const noexcept { return charsets_; }

private:
    bool model_allowed(const std::string& model) const;
    std::string new_id();

    LlmClient& client_;
    SessionStore& store_;
    const CharsetRegistry& charsets_;
    TutorConfig config_;

    std::mutex busy_mutex_;
    std::set<std::string> busy_;
    std::mutex id_mutex_;
    std::mt19937_64 id_rng_;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    /// 0 binds any free port.
    int port = 8080;
    std::optional<std::filesystem::path> static_dir;
};

/// HTTP JSON front end for TutorService.
class TutorServer {
public:
    TutorServer(TutorService& service, ServerOptions options);
    ~TutorServer();

    TutorServer(const TutorServer&) = delete;
    TutorServer& operator=(const TutorServer&) = delete;

    /// Binds the socket. Returns the bound port; throws Error on failure.
    int bind();
    /// Serves until stop(). bind() must have been called.
    void serve();
    /// bind() + serve() on a background thread; returns once ready.
    int start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace sinogate
