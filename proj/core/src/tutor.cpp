#include "sinogate/tutor.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "sinogate/prompt.hpp"

namespace sinogate {

SessionNotFound::SessionNotFound(const std::string& id) : Error("session not found: " + id) {}
SessionBusy::SessionBusy(const std::string& id) : Error("session " + id + " already has a message in flight") {}
EmptyMessage::EmptyMessage() : Error("message text is empty") {}
UnknownModel::UnknownModel(const std::string& model) : Error("unknown model: " + model) {}
TurnLimit::TurnLimit(std::size_t cap) : Error("session reached its turn cap of " + std::to_string(cap)) {}

namespace {

nlohmann::json annotations_json(const std::vector<TurnAnnotation>& annotations)
{
    auto arr = nlohmann::json::array();
    for (const auto& a : annotations) {
        arr.push_back({{"turn_index", a.turn_index}, {"deviation", to_json(a.deviation)}, {"spans", to_json(a.spans)}});
    }
    return arr;
}

std::vector<TurnAnnotation> annotations_from_json(const nlohmann::json& j)
{
    std::vector<TurnAnnotation> out;
    for (const auto& a : j) {
        out.push_back({a.at("turn_index").get<std::size_t>(), deviation_from_json(a.at("deviation")),
                       spans_from_json(a.at("spans"))});
    }
    return out;
}

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool plausible_id(const std::string& id)
{
    if (id.empty() || id.size() > 64) return false;
    for (char c : id) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
    }
    return true;
}

} // namespace

nlohmann::json to_json(const Session& s)
{
    auto history = nlohmann::json::array();
    for (const auto& t : s.history) history.push_back({{"role", to_string(t.role)}, {"content", t.content}});
    nlohmann::json j{
        {"id", s.id},
        {"level", to_string(s.level)},
        {"condition", to_string(s.condition)},
        {"model", s.model_id},
        {"created_at", s.created_at},
        {"history", std::move(history)},
        {"annotations", annotations_json(s.annotations)},
    };
    if (!s.user_annotations.empty()) j["user_annotations"] = annotations_json(s.user_annotations);
    return j;
}

Session session_from_json(const nlohmann::json& j)
{
    Session s;
    s.id = j.at("id").get<std::string>();
    s.level = level_from_string(j.at("level").get<std::string>());
    s.condition = condition_from_string(j.at("condition").get<std::string>());
    s.model_id = j.at("model").get<std::string>();
    s.created_at = j.value("created_at", std::string());
    for (const auto& t : j.at("history")) {
        const auto role = parse_role(t.at("role").get<std::string>());
        if (!role) throw Error("unknown role in stored session");
        s.history.push_back({*role, t.at("content").get<std::string>()});
    }
    s.annotations = annotations_from_json(j.at("annotations"));
    if (j.contains("user_annotations")) s.user_annotations = annotations_from_json(j.at("user_annotations"));
    return s;
}

// ---------------------------------------------------------------------------

SessionStore::SessionStore(std::optional<std::filesystem::path> directory) : dir_(std::move(directory))
{
    if (!dir_) return;
    std::filesystem::create_directories(*dir_);
    for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw Error("corrupt session file " + entry.path().string());
        Session s = session_from_json(j);
        sessions_.emplace(s.id, std::move(s));
    }
}

void SessionStore::put(const Session& session)
{
    std::lock_guard lock(mutex_);
    if (dir_) {
        const auto path = *dir_ / (session.id + ".json");
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << to_json(session).dump(2) << '\n';
            if (!out) throw Error("cannot persist session " + session.id);
        }
        std::filesystem::rename(tmp, path);
    }
    sessions_[session.id] = session;
}

std::optional<Session> SessionStore::get(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

bool SessionStore::erase(const std::string& id)
{
    std::lock_guard lock(mutex_);
    if (sessions_.erase(id) == 0) return false;
    if (dir_) std::filesystem::remove(*dir_ / (id + ".json"));
    return true;
}

std::size_t SessionStore::size() const
{
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

// ---------------------------------------------------------------------------

TutorService::TutorService(LlmClient& client, SessionStore& store, const CharsetRegistry& charsets, TutorConfig config)
    : client_(client), store_(store), charsets_(charsets), config_(std::move(config)), id_rng_(std::random_device{}())
{
}

bool TutorService::model_allowed(const std::string& model) const
{
    if (model == config_.default_model) return true;
    return std::find(config_.models.begin(), config_.models.end(), model) != config_.models.end();
}

std::string TutorService::new_id()
{
    std::lock_guard lock(id_mutex_);
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << id_rng_() << std::setw(16) << id_rng_();
    return os.str();
}

Session TutorService::create_session(ThresholdLevel level,
                                     std::optional<PromptCondition> condition,
                                     std::optional<std::string> model)
{
    const std::string model_id = model.value_or(config_.default_model);
    if (!model_allowed(model_id)) throw UnknownModel(model_id);

    Session s;
    do {
        s.id = new_id();
    } while (store_.get(s.id));
    s.level = level;
    s.condition = condition.value_or(config_.default_condition);
    s.model_id = model_id;
    s.created_at = utc_now();
    s.history.push_back({Role::system, build_system_prompt(charsets_.at(level), s.condition).text});
    store_.put(s);
    return s;
}

MessageResult TutorService::post_message(const std::string& id, const std::string& text)
{
    if (!plausible_id(id)) throw SessionNotFound(id);
    std::optional<Session> current = store_.get(id);
    if (!current) throw SessionNotFound(id);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw EmptyMessage();
    if (current->history.size() - 1 + 2 > config_.turn_cap) throw TurnLimit(config_.turn_cap);

    {
        std::lock_guard lock(busy_mutex_);
        if (!busy_.insert(id).second) throw SessionBusy(id);
    }
    struct Unmark {
        TutorService& self;
        const std::string& id;
        ~Unmark()
        {
            std::lock_guard lock(self.busy_mutex_);
            self.busy_.erase(id);
        }
    } unmark{*this, id};

    // Re-read under the busy mark: another message may have landed in between.
    current = store_.get(id);
    if (!current) throw SessionNotFound(id);
    Session next = *current;

    const ThresholdList& list = charsets_.at(next.level);
    next.history.push_back({Role::user, text});
    CompletionRequest request;
    request.turns = next.history;
    request.params = config_.params;
    request.params.model_id = next.model_id;

    CompletionResponse response = client_.complete(request);

    MessageResult result;
    result.reply = response.content;
    result.deviation = deviation(result.reply, list);
    result.annotated = annotate(result.reply, list);
    if (config_.audit_user_turns) {
        result.user_deviation = deviation(text, list);
        next.user_annotations.push_back(
            {next.history.size() - 1, *result.user_deviation, annotate(text, list).spans});
    }
    next.history.push_back({Role::assistant, result.reply});
    next.annotations.push_back({next.history.size() - 1, result.deviation, result.annotated.spans});
    store_.put(next);
    return result;
}

Session TutorService::get_session(const std::string& id) const
{
    auto s = store_.get(id);
    if (!s) throw SessionNotFound(id);
    return *s;
}

void TutorService::delete_session(const std::string& id)
{
    if (!store_.erase(id)) throw SessionNotFound(id);
}

} // namespace sinogate
