#pragma once

#include <stdexcept>
#include <string>

namespace sinogate {

/// Base of every exception thrown by the library. Domain errors derive from
/// this so the CLI can map them to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sinogate
