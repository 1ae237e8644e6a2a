#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace sinogate::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_domain_error = 1;
inline constexpr int exit_usage_error = 2;

/// Runs one `sinogate` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

} // namespace sinogate::cli
