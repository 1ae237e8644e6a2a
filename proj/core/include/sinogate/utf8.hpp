#pragma once

#include <string>
#include <string_view>

#include "sinogate/error.hpp"

namespace sinogate::utf8 {

inline constexpr char32_t replacement_character = U'\uFFFD';

class InvalidUtf8 : public Error {
public:
    explicit InvalidUtf8(std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Decodes UTF-8 into scalar values. Throws InvalidUtf8 on malformed input
/// (overlong forms, surrogates, truncated sequences, values above U+10FFFF).
std::u32string decode(std::string_view bytes);

/// Same as decode, but substitutes U+FFFD for each maximal invalid subpart.
std::u32string decode_lossy(std::string_view bytes) noexcept;

bool is_valid(std::string_view bytes) noexcept;

void append(std::string& out, char32_t scalar);
std::string encode(char32_t scalar);
std::string encode(std::u32string_view scalars);

} // namespace sinogate::utf8
