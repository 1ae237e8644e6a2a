#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "sinogate/error.hpp"

namespace sinogate::cli {

EnvLookup process_env()
{
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
    };
}

namespace {

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string env_name(const std::string& key)
{
    std::string name = "SINOGATE_";
    for (char c : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return name;
}

} // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text)
{
    std::map<std::string, std::string> out;
    const std::string trimmed = trim(text);
    if (!trimmed.empty() && trimmed.front() == '{') {
        const auto j = nlohmann::json::parse(trimmed, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw Error("config file is not a valid JSON object");
        for (const auto& [k, v] : j.items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
        return out;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line without '=': " + line);
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

Config Config::load(const EnvLookup& env, const std::optional<std::filesystem::path>& explicit_file)
{
    Config c;
    c.env_ = env;
    std::optional<std::filesystem::path> path = explicit_file;
    if (!path) {
        if (auto p = env("SINOGATE_CONFIG")) {
            path = *p;
        } else if (auto home = env("HOME")) {
            const auto candidate = std::filesystem::path(*home) / ".config" / "sinogate" / "config";
            if (std::filesystem::exists(candidate)) path = candidate;
        }
    }
    if (path) {
        std::ifstream in(*path, std::ios::binary);
        if (!in) {
            // A missing default file is fine; an explicitly named one is not.
            if (explicit_file || env("SINOGATE_CONFIG")) throw Error("cannot read config file " + path->string());
        } else {
            c.file_ = parse_config_text(std::string(std::istreambuf_iterator<char>(in), {}));
        }
    }
    return c;
}

std::optional<std::string> Config::get(const std::string& key, const std::optional<std::string>& flag) const
{
    if (flag) return flag;
    if (env_) {
        if (auto v = env_(env_name(key))) return v;
    }
    if (auto it = file_.find(key); it != file_.end()) return it->second;
    return std::nullopt;
}

std::string Config::get_or(const std::string& key, const std::string& fallback,
                           const std::optional<std::string>& flag) const
{
    return get(key, flag).value_or(fallback);
}

} // namespace sinogate::cli
