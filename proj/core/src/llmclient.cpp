#include "sinogate/llmclient.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace sinogate {

std::string_view to_string(Role role) noexcept
{
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "?";
}

std::optional<Role> parse_role(std::string_view text) noexcept
{
    if (text == "system") return Role::system;
    if (text == "user") return Role::user;
    if (text == "assistant") return Role::assistant;
    return std::nullopt;
}

void CompletionRequest::validate() const
{
    if (turns.empty() || turns.front().role != Role::system) {
        throw Error("completion request must start with a system turn");
    }
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (i > 0 && turns[i].role == Role::system) throw Error("completion request has more than one system turn");
        if (turns[i].role != Role::assistant && turns[i].content.empty()) {
            throw Error("system and user turns must not be empty");
        }
    }
    if (params.model_id.empty()) throw Error("completion request has no model");
    if (!(params.temperature >= 0.0)) throw Error("temperature must be >= 0");
}

nlohmann::json wire_payload(const CompletionRequest& request)
{
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& t : request.turns) {
        messages.push_back({{"role", to_string(t.role)}, {"content", t.content}});
    }
    nlohmann::json payload{
        {"model", request.params.model_id},
        {"messages", std::move(messages)},
        {"temperature", request.params.temperature},
    };
    if (request.params.max_output_tokens) payload["max_tokens"] = *request.params.max_output_tokens;
    if (request.params.seed) payload["seed"] = *request.params.seed;
    return payload;
}

CompletionRequest request_from_json(const nlohmann::json& payload)
{
    CompletionRequest r;
    r.params.model_id = payload.at("model").get<std::string>();
    r.params.temperature = payload.value("temperature", 0.7);
    if (payload.contains("max_tokens")) r.params.max_output_tokens = payload.at("max_tokens").get<std::int64_t>();
    if (payload.contains("seed")) r.params.seed = payload.at("seed").get<std::int64_t>();
    for (const auto& m : payload.at("messages")) {
        const auto role = parse_role(m.at("role").get<std::string>());
        if (!role) throw Error("unknown chat role in request");
        r.turns.push_back({*role, m.at("content").get<std::string>()});
    }
    return r;
}

std::string canonical_json(const CompletionRequest& request)
{
    // nlohmann::json objects are std::map backed, so dump() sorts keys.
    return wire_payload(request).dump();
}

namespace {

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
    return os.str();
}

} // namespace

std::string request_hash(const CompletionRequest& request)
{
    return sha256_hex(canonical_json(request));
}

std::string request_hash(const nlohmann::json& payload)
{
    return sha256_hex(nlohmann::json::parse(payload.dump()).dump());
}

CompletionResponse parse_completion_body(std::string body)
{
    CompletionResponse out;
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("completion body is not a JSON object");
    const auto& choices = j.at("choices");
    if (!choices.is_array() || choices.empty()) throw Error("completion body has no choices");
    const auto& choice = choices.front();
    const auto& content = choice.at("message").at("content");
    out.content = content.is_null() ? std::string() : content.get<std::string>();
    if (choice.contains("finish_reason") && choice.at("finish_reason").is_string()) {
        out.finish_reason = choice.at("finish_reason").get<std::string>();
        out.truncated = *out.finish_reason == "length";
    }
    if (j.contains("usage") && j.at("usage").is_object()) {
        const auto& u = j.at("usage");
        out.usage.input_tokens = u.value("prompt_tokens", std::uint64_t{0});
        out.usage.output_tokens = u.value("completion_tokens", std::uint64_t{0});
    }
    out.raw = std::move(body);
    return out;
}

// ---------------------------------------------------------------------------

FixtureMissing::FixtureMissing(std::string hash, std::size_t sample)
    : Error("no replay fixture for request " + hash + " sample " + std::to_string(sample)), hash_(std::move(hash))
{
}

UpstreamFailure::UpstreamFailure(int status, std::size_t attempts, bool retryable, std::string detail)
    : Error("upstream failure (status " + std::to_string(status) + ", " + std::to_string(attempts) +
            " attempt(s)): " + detail),
      status_(status),
      attempts_(attempts),
      retryable_(retryable)
{
}

AuthMissing::AuthMissing() : Error("no API key configured (set SINOGATE_API_KEY)") {}

bool is_transient(const HttpResult& r) noexcept
{
    return r.transport_error.has_value() || r.status == 429 || r.status >= 500;
}

std::chrono::milliseconds RetryPolicy::delay_after(std::size_t attempt, std::mt19937_64& rng) const
{
    const double exponent = static_cast<double>(std::min<std::size_t>(attempt, 63) - 1);
    double delay = std::min(static_cast<double>(cap.count()), static_cast<double>(base.count()) * std::pow(2.0, exponent));
    if (jitter) {
        std::uniform_real_distribution<double> scale(0.5, 1.0);
        delay *= scale(rng);
    }
    return std::chrono::milliseconds(static_cast<std::int64_t>(delay));
}

std::string_view to_string(TransportMode mode) noexcept
{
    switch (mode) {
    case TransportMode::live: return "live";
    case TransportMode::record: return "record";
    case TransportMode::replay: return "replay";
    }
    return "?";
}

std::optional<TransportMode> parse_transport_mode(std::string_view text) noexcept
{
    if (text == "live") return TransportMode::live;
    if (text == "record") return TransportMode::record;
    if (text == "replay") return TransportMode::replay;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fixtures

FixtureStore::FixtureStore(std::filesystem::path directory) : dir_(std::move(directory)) {}

std::filesystem::path FixtureStore::path_for(const std::string& hash) const
{
    return dir_ / (hash + ".json");
}

namespace {

std::optional<nlohmann::json> read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("corrupt fixture file " + path.string());
    return j;
}

} // namespace

std::optional<CompletionResponse> FixtureStore::load(const std::string& hash, std::size_t sample) const
{
    std::lock_guard lock(mutex_);
    const auto j = read_json_file(path_for(hash));
    if (!j) return std::nullopt;
    const auto& responses = j->at("responses");
    const auto key = std::to_string(sample);
    if (!responses.contains(key)) return std::nullopt;
    const auto& r = responses.at(key);
    CompletionResponse out;
    out.content = r.at("content").get<std::string>();
    out.raw = r.value("raw", std::string());
    out.usage.input_tokens = r.at("usage").value("input_tokens", std::uint64_t{0});
    out.usage.output_tokens = r.at("usage").value("output_tokens", std::uint64_t{0});
    if (r.contains("finish_reason") && r.at("finish_reason").is_string()) {
        out.finish_reason = r.at("finish_reason").get<std::string>();
        out.truncated = *out.finish_reason == "length";
    }
    return out;
}

void FixtureStore::save(const CompletionRequest& request, std::size_t sample, const CompletionResponse& response)
{
    std::lock_guard lock(mutex_);
    std::filesystem::create_directories(dir_);
    const auto hash = request_hash(request);
    const auto path = path_for(hash);
    nlohmann::json j = read_json_file(path).value_or(nlohmann::json{{"request", wire_payload(request)},
                                                                     {"responses", nlohmann::json::object()}});
    j["responses"][std::to_string(sample)] = {
        {"content", response.content},
        {"raw", response.raw},
        {"usage", {{"input_tokens", response.usage.input_tokens}, {"output_tokens", response.usage.output_tokens}}},
        {"finish_reason", response.finish_reason ? nlohmann::json(*response.finish_reason) : nlohmann::json(nullptr)},
    };
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << j.dump(2) << '\n';
        if (!out) throw Error("cannot write fixture " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

PriceTable PriceTable::load(const std::filesystem::path& path)
{
    const auto j = read_json_file(path);
    if (!j) throw Error("cannot read price table " + path.string());
    std::map<std::string, ModelPrice> prices;
    for (const auto& [model, p] : j->items()) {
        prices[model] = {p.value("input_per_million", 0.0), p.value("output_per_million", 0.0)};
    }
    return PriceTable(std::move(prices));
}

double PriceTable::cost(const std::string& model, const Usage& usage) const
{
    const auto it = prices_.find(model);
    if (it == prices_.end()) return 0.0;
    return static_cast<double>(usage.input_tokens) * it->second.input_per_million / 1e6 +
           static_cast<double>(usage.output_tokens) * it->second.output_per_million / 1e6;
}

// ---------------------------------------------------------------------------
// Client

LlmClient::LlmClient(ClientConfig config,
                     TransportMode mode,
                     std::optional<std::filesystem::path> fixture_dir,
                     std::unique_ptr<HttpPoster> poster,
                     Sleeper sleeper)
    : config_(std::move(config)),
      mode_(mode),
      poster_(std::move(poster)),
      sleeper_(std::move(sleeper)),
      rng_(config_.jitter_seed)
{
    if (config_.concurrency_limit == 0) config_.concurrency_limit = 1;
    if (fixture_dir) fixtures_.emplace(*fixture_dir);
    if (mode_ != TransportMode::live && !fixtures_) {
        throw Error(std::string(to_string(mode_)) + " transport needs a fixture directory");
    }
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

LlmClient::~LlmClient() = default;

HttpPoster& LlmClient::poster()
{
    std::lock_guard lock(mutex_);
    if (!poster_) poster_ = make_http_poster(config_.base_url, config_.timeout);
    return *poster_;
}

Usage LlmClient::total_usage() const
{
    std::lock_guard lock(mutex_);
    return usage_;
}

std::size_t LlmClient::network_calls() const
{
    std::lock_guard lock(mutex_);
    return network_calls_;
}

CompletionResponse LlmClient::send_live(const CompletionRequest& request)
{
    if (config_.api_key.empty()) throw AuthMissing();
    HttpPoster& http = poster();
    const std::string body = canonical_json(request);
    const HttpHeaders headers{{"Authorization", "Bearer " + config_.api_key}};

    const auto started = std::chrono::steady_clock::now();
    HttpResult last;
    for (std::size_t attempt = 1;; ++attempt) {
        {
            std::lock_guard lock(mutex_);
            ++network_calls_;
        }
        last = http.post(body, headers);
        if (!last.transport_error && last.status >= 200 && last.status < 300) {
            CompletionResponse response;
            try {
                response = parse_completion_body(std::move(last.body));
            } catch (const std::exception& e) {
                throw UpstreamFailure(last.status, attempt, false, e.what());
            }
            response.attempts = attempt;
            response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            return response;
        }
        const bool transient = is_transient(last);
        if (!transient || attempt >= config_.retry.max_attempts) {
            const std::string detail = last.transport_error ? *last.transport_error : last.body.substr(0, 500);
            throw UpstreamFailure(last.status, attempt, transient, detail);
        }
        std::chrono::milliseconds delay;
        {
            std::lock_guard lock(mutex_);
            delay = config_.retry.delay_after(attempt, rng_);
        }
        sleeper_(delay);
    }
}

CompletionResponse LlmClient::complete(const CompletionRequest& request, std::size_t sample)
{
    request.validate();
    if (mode_ == TransportMode::replay) {
        const auto hash = request_hash(request);
        auto stored = fixtures_->load(hash, sample);
        if (!stored) throw FixtureMissing(hash, sample);
        std::lock_guard lock(mutex_);
        usage_ += stored->usage;
        return *stored;
    }

    {
        std::unique_lock lock(mutex_);
        slot_freed_.wait(lock, [&] { return in_flight_ < config_.concurrency_limit; });
        ++in_flight_;
    }
    struct Release {
        LlmClient& self;
        ~Release()
        {
            {
                std::lock_guard lock(self.mutex_);
                --self.in_flight_;
            }
            self.slot_freed_.notify_one();
        }
    } release{*this};

    CompletionResponse response = send_live(request);
    if (mode_ == TransportMode::record) fixtures_->save(request, sample, response);
    std::lock_guard lock(mutex_);
    usage_ += response.usage;
    return response;
}

} // namespace sinogate
