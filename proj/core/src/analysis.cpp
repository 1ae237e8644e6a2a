#include "sinogate/analysis.hpp"

#include <unordered_set>

#include "sinogate/utf8.hpp"

namespace sinogate {

namespace {
constexpr HanRanges any_han{true, true};
} // namespace

ScanResult extract_han(std::u32string_view scalars, const HanRanges& ranges)
{
    ScanResult result;
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        if (auto c = HanChar::try_make(scalars[i], ranges)) {
            result.tokens.push_back({*c, i});
        }
    }
    return result;
}

ScanResult extract_han(std::string_view text, const HanRanges& ranges)
{
    return extract_han(utf8::decode_lossy(text), ranges);
}

std::string_view to_string(CountingMode mode) noexcept
{
    return mode == CountingMode::type ? "type" : "occurrence";
}

std::optional<CountingMode> parse_counting_mode(std::string_view text) noexcept
{
    if (text == "occurrence") return CountingMode::occurrence;
    if (text == "type") return CountingMode::type;
    return std::nullopt;
}

DeviationReport deviation(std::string_view text, const ThresholdList& list, CountingMode mode, const HanRanges& ranges)
{
    const ScanResult scan = extract_han(text, ranges);
    DeviationReport report;
    report.counting_mode = mode;

    std::unordered_set<HanChar> distinct;
    std::unordered_set<HanChar> distinct_out;
    for (const HanToken& token : scan.tokens) {
        distinct.insert(token.character);
        if (list.contains(token.character)) continue;
        report.out_occurrences.push_back(token);
        if (distinct_out.insert(token.character).second) {
            report.out_unique.push_back(token.character);
        }
    }

    if (mode == CountingMode::occurrence) {
        report.total_han = scan.tokens.size();
        report.out_count = report.out_occurrences.size();
    } else {
        report.total_han = distinct.size();
        report.out_count = report.out_unique.size();
    }
    if (report.total_han > 0) {
        report.out_ratio = static_cast<double>(report.out_count) / static_cast<double>(report.total_han);
    }
    return report;
}

AnnotatedText annotate(std::string_view text, const ThresholdList& list, const HanRanges& ranges)
{
    AnnotatedText out{std::string(text), {}};
    for (const HanToken& t : deviation(text, list, CountingMode::occurrence, ranges).out_occurrences) {
        out.spans.push_back({t.index, t.index + 1, t.character});
    }
    return out;
}

nlohmann::json to_json(const DeviationReport& r)
{
    auto unique = nlohmann::json::array();
    for (HanChar c : r.out_unique) unique.push_back(c.utf8());
    auto occurrences = nlohmann::json::array();
    for (const HanToken& t : r.out_occurrences) {
        occurrences.push_back({{"char", t.character.utf8()}, {"index", t.index}});
    }
    return {
        {"total_han", r.total_han},
        {"out_count", r.out_count},
        {"out_ratio", r.out_ratio ? nlohmann::json(*r.out_ratio) : nlohmann::json(nullptr)},
        {"counting_mode", to_string(r.counting_mode)},
        {"out_unique", std::move(unique)},
        {"out_occurrences", std::move(occurrences)},
    };
}

DeviationReport deviation_from_json(const nlohmann::json& j)
{
    DeviationReport r;
    r.total_han = j.at("total_han").get<std::size_t>();
    r.out_count = j.at("out_count").get<std::size_t>();
    if (!j.at("out_ratio").is_null()) r.out_ratio = j.at("out_ratio").get<double>();
    const auto mode = parse_counting_mode(j.at("counting_mode").get<std::string>());
    if (!mode) throw Error("unknown counting_mode in deviation report");
    r.counting_mode = *mode;
    for (const auto& c : j.at("out_unique")) r.out_unique.push_back(HanChar::from_utf8(c.get<std::string>(), any_han));
    for (const auto& o : j.at("out_occurrences")) {
        r.out_occurrences.push_back(
            {HanChar::from_utf8(o.at("char").get<std::string>(), any_han), o.at("index").get<std::size_t>()});
    }
    return r;
}

nlohmann::json to_json(const std::vector<HighlightSpan>& spans)
{
    auto arr = nlohmann::json::array();
    for (const auto& s : spans) {
        arr.push_back({{"start", s.start}, {"end", s.end}, {"char", s.character.utf8()}});
    }
    return arr;
}

std::vector<HighlightSpan> spans_from_json(const nlohmann::json& j)
{
    std::vector<HighlightSpan> out;
    for (const auto& s : j) {
        out.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(),
                       HanChar::from_utf8(s.at("char").get<std::string>(), any_han)});
    }
    return out;
}

} // namespace sinogate
