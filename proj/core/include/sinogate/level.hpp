#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "sinogate/error.hpp"

namespace sinogate {

/// EBCL character-threshold level. Declaration order is the proficiency order.
enum class ThresholdLevel { A1, A1plus, A2 };

inline constexpr std::array<ThresholdLevel, 3> all_levels{
    ThresholdLevel::A1, ThresholdLevel::A1plus, ThresholdLevel::A2};

/// Identifier used in files and on the wire: "A1", "A1plus", "A2".
std::string_view to_string(ThresholdLevel level) noexcept;

/// Accepts the identifiers above and the "A1+" spelling, case-insensitively.
std::optional<ThresholdLevel> parse_level(std::string_view text) noexcept;

class UnknownLevel : public Error {
public:
    explicit UnknownLevel(std::string_view text);
};

ThresholdLevel level_from_string(std::string_view text);

} // namespace sinogate
