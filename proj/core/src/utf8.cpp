#include "sinogate/utf8.hpp"

#include <optional>

namespace sinogate::utf8 {

InvalidUtf8::InvalidUtf8(std::size_t offset)
    : Error("invalid UTF-8 at byte offset " + std::to_string(offset)), offset_(offset)
{
}

namespace {

struct Decoded {
    char32_t scalar;
    std::size_t length;
};

// Returns the scalar starting at `pos`, or nullopt with `bad_length` set to
// the length of the maximal invalid subpart.
std::optional<Decoded> decode_one(std::string_view s, std::size_t pos, std::size_t& bad_length)
{
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    const unsigned char lead = byte(pos);
    bad_length = 1;
    if (lead < 0x80) {
        return Decoded{lead, 1};
    }
    std::size_t length = 0;
    char32_t scalar = 0;
    unsigned char lo = 0x80;
    unsigned char hi = 0xBF;
    if (lead >= 0xC2 && lead <= 0xDF) {
        length = 2;
        scalar = lead & 0x1F;
    } else if (lead >= 0xE0 && lead <= 0xEF) {
        length = 3;
        scalar = lead & 0x0F;
        if (lead == 0xE0) lo = 0xA0;
        if (lead == 0xED) hi = 0x9F;
    } else if (lead >= 0xF0 && lead <= 0xF4) {
        length = 4;
        scalar = lead & 0x07;
        if (lead == 0xF0) lo = 0x90;
        if (lead == 0xF4) hi = 0x8F;
    } else {
        return std::nullopt;
    }
    for (std::size_t i = 1; i < length; ++i) {
        if (pos + i >= s.size()) {
            bad_length = i;
            return std::nullopt;
        }
        const unsigned char cont = byte(pos + i);
        const unsigned char min = i == 1 ? lo : 0x80;
        const unsigned char max = i == 1 ? hi : 0xBF;
        if (cont < min || cont > max) {
            bad_length = i;
            return std::nullopt;
        }
        scalar = (scalar << 6) | (cont & 0x3F);
    }
    return Decoded{scalar, length};
}

} // namespace

std::u32string decode(std::string_view bytes)
{
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        std::size_t bad = 0;
        const auto d = decode_one(bytes, pos, bad);
        if (!d) {
            throw InvalidUtf8(pos);
        }
        out.push_back(d->scalar);
        pos += d->length;
    }
    return out;
}

std::u32string decode_lossy(std::string_view bytes) noexcept
{
    std::u32string out;
    out.reserve(bytes.size());
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        std::size_t bad = 0;
        if (const auto d = decode_one(bytes, pos, bad)) {
            out.push_back(d->scalar);
            pos += d->length;
        } else {
            out.push_back(replacement_character);
            pos += bad;
        }
    }
    return out;
}

bool is_valid(std::string_view bytes) noexcept
{
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        std::size_t bad = 0;
        const auto d = decode_one(bytes, pos, bad);
        if (!d) return false;
        pos += d->length;
    }
    return true;
}

void append(std::string& out, char32_t c)
{
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

std::string encode(char32_t scalar)
{
    std::string out;
    append(out, scalar);
    return out;
}

std::string encode(std::u32string_view scalars)
{
    std::string out;
    out.reserve(scalars.size() * 3);
    for (char32_t c : scalars) {
        append(out, c);
    }
    return out;
}

} // namespace sinogate::utf8
