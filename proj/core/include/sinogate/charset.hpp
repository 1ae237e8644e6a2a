#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "sinogate/error.hpp"
#include "sinogate/han.hpp"
#include "sinogate/level.hpp"

namespace sinogate {

/// An ordered set of Han characters a level's text should restrict itself to.
///
/// Immutable after construction. Builtin lists are kept exactly as printed,
/// so a builtin list may carry anomalies (duplicates, missing characters);
/// validate() is the place those surface.
class ThresholdList {
public:
    ThresholdList(ThresholdLevel level,
                  std::vector<HanChar> characters,
                  std::optional<std::size_t> claimed_size,
                  std::string source_id);

    [[nodiscard]] ThresholdLevel level() const noexcept { return level_; }
    [[nodiscard]] std::span<const HanChar> characters() const noexcept { return characters_; }
    [[nodiscard]] std::optional<std::size_t> claimed_size() const noexcept { return claimed_size_; }
    [[nodiscard]] const std::string& source_id() const noexcept { return source_id_; }
    [[nodiscard]] std::size_t size() const noexcept { return characters_.size(); }

    [[nodiscard]] bool contains(HanChar c) const noexcept { return index_.contains(c.codepoint()); }
    [[nodiscard]] bool contains(char32_t c) const noexcept { return index_.contains(c); }

    /// The characters concatenated as UTF-8, in list order.
    [[nodiscard]] std::string render() const;

    /// Equal level and identical character sequence.
    friend bool operator==(const ThresholdList& a, const ThresholdList& b) noexcept
    {
        return a.level_ == b.level_ && a.characters_ == b.characters_;
    }

private:
    ThresholdLevel level_;
    std::vector<HanChar> characters_;
    std::optional<std::size_t> claimed_size_;
    std::string source_id_;
    std::unordered_set<char32_t> index_;
};

class EmptyList : public Error {
public:
    EmptyList();
};

class DuplicateCharacter : public Error {
public:
    explicit DuplicateCharacter(HanChar c);
    HanChar character() const noexcept { return character_; }

private:
    HanChar character_;
};

/// The printed list for `level`, whitespace stripped.
/// claimed_size is 320 for A1, 630 for A2 and unset for A1plus.
ThresholdList load_builtin(ThresholdLevel level);

/// Union of every builtin list at or below `level`, in level then list order.
/// Labelled "cumulative:<level>"; not what the printed prompts embed.
ThresholdList load_cumulative(ThresholdLevel level);

/// Extracts Han characters from free-form text (any separators). Throws
/// EmptyList when none are found and DuplicateCharacter on the first repeat.
ThresholdList load_custom(std::string_view source_text, ThresholdLevel level, std::string source_id = "custom");

/// Reads a UTF-8 file and forwards to load_custom with the path as source id.
ThresholdList load_custom_file(const std::string& path, ThresholdLevel level);

/// Characters of `a` absent from `b`, in `a`'s order.
std::vector<HanChar> diff(const ThresholdList& a, const ThresholdList& b);

struct ListValidation {
    ThresholdLevel level;
    std::string source_id;
    std::size_t actual_count = 0;   // entries as ingested
    std::size_t distinct_count = 0;
    std::optional<std::size_t> claimed_size;
    std::vector<HanChar> duplicates; // sorted by codepoint
};

/// Characters present at `lower` but missing from `higher`.
struct MonotonicityGap {
    ThresholdLevel lower;
    ThresholdLevel higher;
    std::vector<HanChar> missing; // sorted by codepoint
};

struct CharsetValidationReport {
    std::vector<ListValidation> lists;
    std::vector<MonotonicityGap> gaps;

    [[nodiscard]] const ListValidation* find(ThresholdLevel level) const noexcept;
    [[nodiscard]] const MonotonicityGap* find_gap(ThresholdLevel lower, ThresholdLevel higher) const noexcept;
};

/// Report-only quality gate; never throws on anomalies. Lists are reported in
/// level order. Gaps are computed for each pair of consecutive distinct levels
/// among the inputs.
CharsetValidationReport validate(std::span<const ThresholdList> lists);

nlohmann::json to_json(const CharsetValidationReport& report);

/// Builtin lists for all three levels, loaded once.
class CharsetRegistry {
public:
    CharsetRegistry();
    explicit CharsetRegistry(std::vector<ThresholdList> lists);

    /// Throws Error if the level has no list.
    [[nodiscard]] const ThresholdList& at(ThresholdLevel level) const;

private:
    std::vector<ThresholdList> lists_;
};

} // namespace sinogate
