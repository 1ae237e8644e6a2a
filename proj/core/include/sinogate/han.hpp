#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "sinogate/error.hpp"

namespace sinogate {

/// Which ideograph blocks count as Han characters.
///
/// The base block (CJK Unified Ideographs, U+4E00..U+9FFF) is always on.
/// Extension A (U+3400..U+4DBF) is on by default. Extensions B and later, plus
/// the compatibility ideographs, are opt-in because no threshold character
/// lives there and including them shifts denominators.
struct HanRanges {
    bool extension_a = true;
    bool supplementary = false;

    [[nodiscard]] constexpr bool contains(char32_t c) const noexcept
    {
        if (c >= 0x4E00 && c <= 0x9FFF) return true;
        if (extension_a && c >= 0x3400 && c <= 0x4DBF) return true;
        if (supplementary) {
            if (c >= 0xF900 && c <= 0xFAFF) return true;    // compatibility ideographs
            if (c >= 0x20000 && c <= 0x323AF) return true;  // extensions B..H
        }
        return false;
    }
};

inline constexpr HanRanges default_han_ranges{};

class NotHanCharacter : public Error {
public:
    explicit NotHanCharacter(char32_t c);
    char32_t codepoint() const noexcept { return codepoint_; }

private:
    char32_t codepoint_;
};

/// One Han scalar value.
class HanChar {
public:
    /// Throws NotHanCharacter when `c` lies outside `ranges`.
    explicit HanChar(char32_t c, const HanRanges& ranges = default_han_ranges);

    static std::optional<HanChar> try_make(char32_t c, const HanRanges& ranges = default_han_ranges) noexcept;
    /// Parses exactly one UTF-8 encoded Han character.
    static HanChar from_utf8(std::string_view text, const HanRanges& ranges = default_han_ranges);

    [[nodiscard]] constexpr char32_t codepoint() const noexcept { return cp_; }
    [[nodiscard]] std::string utf8() const;

    friend constexpr auto operator<=>(HanChar, HanChar) noexcept = default;

private:
    struct Unchecked {};
    constexpr HanChar(char32_t c, Unchecked) noexcept : cp_(c) {}

    char32_t cp_;
};

} // namespace sinogate

template <>
struct std::hash<sinogate::HanChar> {
    std::size_t operator()(sinogate::HanChar c) const noexcept { return std::hash<char32_t>{}(c.codepoint()); }
};
