#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sinogate/charset.hpp"
#include "sinogate/han.hpp"

namespace sinogate {

/// A Han character and its zero-based position in the source's scalar sequence.
struct HanToken {
    HanChar character;
    std::size_t index;

    friend bool operator==(const HanToken&, const HanToken&) = default;
};

struct ScanResult {
    std::vector<HanToken> tokens;
};

/// Every scalar inside `ranges`, in order. Invalid UTF-8 is decoded lossily
/// (U+FFFD is never Han, so it only shifts indices like any other scalar).
ScanResult extract_han(std::string_view text, const HanRanges& ranges = default_han_ranges);
ScanResult extract_han(std::u32string_view scalars, const HanRanges& ranges = default_han_ranges);

/// occurrence counts every token; type counts each distinct character once.
enum class CountingMode { occurrence, type };

std::string_view to_string(CountingMode mode) noexcept;
std::optional<CountingMode> parse_counting_mode(std::string_view text) noexcept;

struct DeviationReport {
    std::size_t total_han = 0;
    std::size_t out_count = 0;
    /// Unset when total_han == 0: a reply without Han text says nothing about compliance.
    std::optional<double> out_ratio;
    /// Every out-of-list token, in both counting modes.
    std::vector<HanToken> out_occurrences;
    /// Distinct out-of-list characters in order of first appearance.
    std::vector<HanChar> out_unique;
    CountingMode counting_mode = CountingMode::occurrence;

    friend bool operator==(const DeviationReport&, const DeviationReport&) = default;
};

DeviationReport deviation(std::string_view text,
                          const ThresholdList& list,
                          CountingMode mode = CountingMode::occurrence,
                          const HanRanges& ranges = default_han_ranges);

/// Half-open [start, end) over scalar indices; always one scalar long.
struct HighlightSpan {
    std::size_t start;
    std::size_t end;
    HanChar character;

    friend bool operator==(const HighlightSpan&, const HighlightSpan&) = default;
};

struct AnnotatedText {
    std::string source;
    std::vector<HighlightSpan> spans;
};

AnnotatedText annotate(std::string_view text, const ThresholdList& list, const HanRanges& ranges = default_han_ranges);

nlohmann::json to_json(const DeviationReport& report);
DeviationReport deviation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<HighlightSpan>& spans);
std::vector<HighlightSpan> spans_from_json(const nlohmann::json& j);

} // namespace sinogate
