#include "sinogate/charset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "embedded_data.hpp"
#include "sinogate/utf8.hpp"

namespace sinogate {

// ---------------------------------------------------------------------------
// Level, HanChar

std::string_view to_string(ThresholdLevel level) noexcept
{
    switch (level) {
    case ThresholdLevel::A1: return "A1";
    case ThresholdLevel::A1plus: return "A1plus";
    case ThresholdLevel::A2: return "A2";
    }
    return "?";
}

std::optional<ThresholdLevel> parse_level(std::string_view text) noexcept
{
    std::string lowered;
    for (char c : text) {
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lowered == "a1") return ThresholdLevel::A1;
    if (lowered == "a1plus" || lowered == "a1+") return ThresholdLevel::A1plus;
    if (lowered == "a2") return ThresholdLevel::A2;
    return std::nullopt;
}

UnknownLevel::UnknownLevel(std::string_view text)
    : Error("unknown level '" + std::string(text) + "' (expected A1, A1plus or A2)")
{
}

ThresholdLevel level_from_string(std::string_view text)
{
    if (auto level = parse_level(text)) return *level;
    throw UnknownLevel(text);
}

NotHanCharacter::NotHanCharacter(char32_t c)
    : Error("U+" + [c] {
          std::ostringstream os;
          os << std::hex << std::uppercase << static_cast<std::uint32_t>(c);
          return os.str();
      }() + " is not in the accepted Han ranges"),
      codepoint_(c)
{
}

HanChar::HanChar(char32_t c, const HanRanges& ranges) : cp_(c)
{
    if (!ranges.contains(c)) throw NotHanCharacter(c);
}

std::optional<HanChar> HanChar::try_make(char32_t c, const HanRanges& ranges) noexcept
{
    if (!ranges.contains(c)) return std::nullopt;
    return HanChar(c, Unchecked{});
}

HanChar HanChar::from_utf8(std::string_view text, const HanRanges& ranges)
{
    const auto scalars = utf8::decode(text);
    if (scalars.size() != 1) {
        throw Error("expected exactly one character, got '" + std::string(text) + "'");
    }
    return HanChar(scalars.front(), ranges);
}

std::string HanChar::utf8() const
{
    return utf8::encode(cp_);
}

// ---------------------------------------------------------------------------
// ThresholdList

ThresholdList::ThresholdList(ThresholdLevel level,
                             std::vector<HanChar> characters,
                             std::optional<std::size_t> claimed_size,
                             std::string source_id)
    : level_(level),
      characters_(std::move(characters)),
      claimed_size_(claimed_size),
      source_id_(std::move(source_id))
{
    index_.reserve(characters_.size());
    for (HanChar c : characters_) {
        index_.insert(c.codepoint());
    }
}

std::string ThresholdList::render() const
{
    std::string out;
    out.reserve(characters_.size() * 3);
    for (HanChar c : characters_) {
        utf8::append(out, c.codepoint());
    }
    return out;
}

EmptyList::EmptyList() : Error("no Han characters found in list source") {}

DuplicateCharacter::DuplicateCharacter(HanChar c)
    : Error("duplicate character " + c.utf8() + " in list source"), character_(c)
{
}

namespace {

std::vector<HanChar> extract_list_characters(std::string_view text)
{
    std::vector<HanChar> out;
    for (char32_t c : utf8::decode(text)) {
        if (auto han = HanChar::try_make(c)) out.push_back(*han);
    }
    return out;
}

std::string_view builtin_source(ThresholdLevel level)
{
    switch (level) {
    case ThresholdLevel::A1: return embedded::a1_list;
    case ThresholdLevel::A1plus: return embedded::a1plus_list;
    case ThresholdLevel::A2: return embedded::a2_list;
    }
    return {};
}

std::optional<std::size_t> builtin_claimed_size(ThresholdLevel level)
{
    switch (level) {
    case ThresholdLevel::A1: return 320;
    case ThresholdLevel::A2: return 630;
    case ThresholdLevel::A1plus: break;
    }
    return std::nullopt;
}

std::vector<HanChar> sorted_by_codepoint(std::vector<HanChar> v)
{
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

ThresholdList load_builtin(ThresholdLevel level)
{
    return ThresholdList(level,
                         extract_list_characters(builtin_source(level)),
                         builtin_claimed_size(level),
                         "builtin:" + std::string(to_string(level)));
}

ThresholdList load_cumulative(ThresholdLevel level)
{
    std::vector<HanChar> out;
    std::unordered_set<HanChar> seen;
    for (ThresholdLevel l : all_levels) {
        if (l > level) break;
        const ThresholdList list = load_builtin(l);
        for (HanChar c : list.characters()) {
            if (seen.insert(c).second) out.push_back(c);
        }
    }
    return ThresholdList(level, std::move(out), std::nullopt, "cumulative:" + std::string(to_string(level)));
}

ThresholdList load_custom(std::string_view source_text, ThresholdLevel level, std::string source_id)
{
    auto characters = extract_list_characters(source_text);
    if (characters.empty()) throw EmptyList();
    std::unordered_set<HanChar> seen;
    for (HanChar c : characters) {
        if (!seen.insert(c).second) throw DuplicateCharacter(c);
    }
    return ThresholdList(level, std::move(characters), std::nullopt, std::move(source_id));
}

ThresholdList load_custom_file(const std::string& path, ThresholdLevel level)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read list file " + path);
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return load_custom(text, level, path);
}

std::vector<HanChar> diff(const ThresholdList& a, const ThresholdList& b)
{
    std::vector<HanChar> out;
    for (HanChar c : a.characters()) {
        if (!b.contains(c)) out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

const ListValidation* CharsetValidationReport::find(ThresholdLevel level) const noexcept
{
    for (const auto& l : lists) {
        if (l.level == level) return &l;
    }
    return nullptr;
}

const MonotonicityGap* CharsetValidationReport::find_gap(ThresholdLevel lower, ThresholdLevel higher) const noexcept
{
    for (const auto& g : gaps) {
        if (g.lower == lower && g.higher == higher) return &g;
    }
    return nullptr;
}

CharsetValidationReport validate(std::span<const ThresholdList> lists)
{
    std::vector<const ThresholdList*> ordered;
    for (const auto& list : lists) ordered.push_back(&list);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ThresholdList* a, const ThresholdList* b) { return a->level() < b->level(); });

    CharsetValidationReport report;
    for (const ThresholdList* list : ordered) {
        ListValidation v{list->level(), list->source_id(), list->size(), 0, list->claimed_size(), {}};
        std::map<HanChar, std::size_t> counts;
        for (HanChar c : list->characters()) ++counts[c];
        v.distinct_count = counts.size();
        for (const auto& [c, n] : counts) {
            if (n > 1) v.duplicates.push_back(c);
        }
        report.lists.push_back(std::move(v));
    }

    for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
        const ThresholdList& lower = *ordered[i];
        const ThresholdList& higher = *ordered[i + 1];
        if (lower.level() == higher.level()) continue;
        report.gaps.push_back({lower.level(), higher.level(), sorted_by_codepoint(diff(lower, higher))});
    }
    return report;
}

nlohmann::json to_json(const CharsetValidationReport& report)
{
    const auto chars = [](const std::vector<HanChar>& v) {
        auto arr = nlohmann::json::array();
        for (HanChar c : v) arr.push_back(c.utf8());
        return arr;
    };
    nlohmann::json out;
    out["lists"] = nlohmann::json::array();
    for (const auto& l : report.lists) {
        out["lists"].push_back({
            {"level", to_string(l.level)},
            {"source", l.source_id},
            {"actual_count", l.actual_count},
            {"distinct_count", l.distinct_count},
            {"claimed_size", l.claimed_size ? nlohmann::json(*l.claimed_size) : nlohmann::json(nullptr)},
            {"duplicates", chars(l.duplicates)},
        });
    }
    out["gaps"] = nlohmann::json::array();
    for (const auto& g : report.gaps) {
        out["gaps"].push_back({
            {"pair", std::string(to_string(g.lower)) + "->" + std::string(to_string(g.higher))},
            {"chars", chars(g.missing)},
        });
    }
    return out;
}

// ---------------------------------------------------------------------------

CharsetRegistry::CharsetRegistry()
{
    for (ThresholdLevel l : all_levels) lists_.push_back(load_builtin(l));
}

CharsetRegistry::CharsetRegistry(std::vector<ThresholdList> lists) : lists_(std::move(lists)) {}

const ThresholdList& CharsetRegistry::at(ThresholdLevel level) const
{
    for (const auto& l : lists_) {
        if (l.level() == level) return l;
    }
    throw Error("no character list configured for level " + std::string(to_string(level)));
}

} // namespace sinogate
