#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sinogate/error.hpp"

namespace sinogate {

enum class Role { system, user, assistant };
std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

struct ChatTurn {
    Role role;
    std::string content;

    friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

struct GenerationParams {
    std::string model_id;
    double temperature = 0.7;
    std::optional<std::int64_t> max_output_tokens;
    /// Not sent unless set; only some endpoints honour it.
    std::optional<std::int64_t> seed;
};

struct CompletionRequest {
    std::vector<ChatTurn> turns;
    GenerationParams params;

    /// Exactly one system turn, first; non-empty system/user content;
    /// temperature >= 0; a model id. Throws Error otherwise.
    void validate() const;
};

struct Usage {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;

    Usage& operator+=(const Usage& other) noexcept
    {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
    friend bool operator==(const Usage&, const Usage&) = default;
};

struct CompletionResponse {
    std::string content;
    Usage usage;
    std::chrono::milliseconds latency{0};
    /// Upstream body exactly as received (or as stored, in replay).
    std::string raw;
    std::optional<std::string> finish_reason;
    bool truncated = false;
    std::size_t attempts = 1;
};

/// The chat-completions POST body. Also the canonical form that is hashed.
nlohmann::json wire_payload(const CompletionRequest& request);
CompletionRequest request_from_json(const nlohmann::json& payload);

/// Compact dump of the payload with object keys sorted.
std::string canonical_json(const CompletionRequest& request);

/// Lowercase hex SHA-256 of the canonical JSON.
std::string request_hash(const CompletionRequest& request);
/// Same digest for an already-built payload; key order does not matter.
std::string request_hash(const nlohmann::json& payload);

/// Parses an OpenAI-style chat-completions response body.
CompletionResponse parse_completion_body(std::string body);

// ---------------------------------------------------------------------------

class FixtureMissing : public Error {
public:
    FixtureMissing(std::string hash, std::size_t sample);
    const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

class UpstreamFailure : public Error {
public:
    UpstreamFailure(int status, std::size_t attempts, bool retryable, std::string detail);
    int status() const noexcept { return status_; }
    std::size_t attempts() const noexcept { return attempts_; }
    /// True when the failure was transient (the caller may try again later).
    bool retryable() const noexcept { return retryable_; }

private:
    int status_;
    std::size_t attempts_;
    bool retryable_;
};

class AuthMissing : public Error {
public:
    AuthMissing();
};

// ---------------------------------------------------------------------------

struct HttpResult {
    int status = 0;
    std::string body;
    /// Set when no HTTP response arrived (connection refused, timeout, TLS...).
    std::optional<std::string> transport_error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// One POST to the chat-completions endpoint. Implementations must be safe to
/// call from several threads.
class HttpPoster {
public:
    virtual ~HttpPoster() = default;
    virtual HttpResult post(const std::string& body, const HttpHeaders& headers) = 0;
};

/// cpp-httplib backed poster for `<base_url>/chat/completions`.
std::unique_ptr<HttpPoster> make_http_poster(const std::string& base_url, std::chrono::seconds timeout);

bool is_transient(const HttpResult& result) noexcept;

struct RetryPolicy {
    std::size_t max_attempts = 5;
    std::chrono::milliseconds base{1000};
    std::chrono::milliseconds cap{60000};
    bool jitter = true;

    /// Delay after failed attempt number `attempt` (1-based):
    /// min(cap, base * 2^(attempt-1)), scaled into [0.5, 1.0] when jittered.
    std::chrono::milliseconds delay_after(std::size_t attempt, std::mt19937_64& rng) const;
};

// ---------------------------------------------------------------------------

enum class TransportMode { live, record, replay };
std::string_view to_string(TransportMode mode) noexcept;
std::optional<TransportMode> parse_transport_mode(std::string_view text) noexcept;

/// One JSON file per request hash under a directory. Each file holds the
/// canonical request and responses indexed by sample number, since repeated
/// runs of one experiment cell send identical requests.
class FixtureStore {
public:
    explicit FixtureStore(std::filesystem::path directory);

    [[nodiscard]] std::optional<CompletionResponse> load(const std::string& hash, std::size_t sample) const;
    void save(const CompletionRequest& request, std::size_t sample, const CompletionResponse& response);

    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }
    [[nodiscard]] std::filesystem::path path_for(const std::string& hash) const;

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

struct ModelPrice {
    double input_per_million = 0.0;
    double output_per_million = 0.0;
};

/// Per-model token prices, USD per million tokens.
class PriceTable {
public:
    PriceTable() = default;
    explicit PriceTable(std::map<std::string, ModelPrice> prices) : prices_(std::move(prices)) {}

    /// JSON object {model: {input_per_million, output_per_million}}.
    static PriceTable load(const std::filesystem::path& path);

    /// Unknown models cost nothing.
    [[nodiscard]] double cost(const std::string& model, const Usage& usage) const;

private:
    std::map<std::string, ModelPrice> prices_;
};

struct ClientConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string default_model = "gpt-4o";
    std::size_t concurrency_limit = 1;
    std::chrono::seconds timeout{120};
    RetryPolicy retry;
    std::uint64_t jitter_seed = 0x5eed;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Chat-completions client. Shareable across threads; at most
/// `concurrency_limit` requests are in flight at once.
class LlmClient {
public:
    /// `poster` defaults to an HTTP poster for config.base_url. A fixture
    /// store is required for record and replay.
    LlmClient(ClientConfig config,
              TransportMode mode,
              std::optional<std::filesystem::path> fixture_dir = std::nullopt,
              std::unique_ptr<HttpPoster> poster = nullptr,
              Sleeper sleeper = nullptr);
    ~LlmClient();

    LlmClient(const LlmClient&) = delete;
    LlmClient& operator=(const LlmClient&) = delete;

    /// `sample` selects among stored responses for identical requests.
    CompletionResponse complete(const CompletionRequest& request, std::size_t sample = 0);

    [[nodiscard]] TransportMode mode() const noexcept { return mode_; }
    [[nodiscard]] const ClientConfig& config() const noexcept { return config_; }
    [[nodiscard]] Usage total_usage() const;
    /// HTTP POSTs issued, retries included.
    [[nodiscard]] std::size_t network_calls() const;
    [[nodiscard]] std::size_t concurrency_limit() const noexcept { return config_.concurrency_limit; }

private:
    CompletionResponse send_live(const CompletionRequest& request);
    HttpPoster& poster();

    ClientConfig config_;
    TransportMode mode_;
    std::optional<FixtureStore> fixtures_;
    std::unique_ptr<HttpPoster> poster_;
    Sleeper sleeper_;

    mutable std::mutex mutex_;
    std::condition_variable slot_freed_;
    std::size_t in_flight_ = 0;
    Usage usage_;
    std::size_t network_calls_ = 0;
    std::mt19937_64 rng_;
};

} // namespace sinogate
