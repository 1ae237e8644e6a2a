#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

namespace sinogate::cli {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

/// Settings resolved from, in decreasing precedence: command-line flags,
/// SINOGATE_* environment variables, then the config file.
///
/// The config file is key=value lines (`#` comments) or a flat JSON object,
/// read from --config, $SINOGATE_CONFIG, or ~/.config/sinogate/config.
/// Keys: api_key, base_url, model, concurrency, price_table, fixtures,
/// store, sessions, timeout.
class Config {
public:
    static Config load(const EnvLookup& env, const std::optional<std::filesystem::path>& explicit_file);

    /// Flag value wins when present; then env SINOGATE_<KEY>; then the file.
    [[nodiscard]] std::optional<std::string> get(const std::string& key,
                                                 const std::optional<std::string>& flag = std::nullopt) const;
    [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback,
                                     const std::optional<std::string>& flag = std::nullopt) const;

private:
    EnvLookup env_;
    std::map<std::string, std::string> file_;
};

std::map<std::string, std::string> parse_config_text(const std::string& text);

} // namespace sinogate::cli
