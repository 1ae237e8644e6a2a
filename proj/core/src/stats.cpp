#include "sinogate/stats.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace sinogate {

EmptyGroup::EmptyGroup(const GroupKey& key)
    : Error("no defined ratios for " + key.model_id + "/" + std::string(to_string(key.level)) + "/" +
            std::string(to_string(key.task)) + "/" + std::string(to_string(key.condition)))
{
}

MissingCondition::MissingCondition(std::string model_id, ThresholdLevel level, TaskCode task)
    : Error("missing a prompt condition for " + model_id + "/" + std::string(to_string(level)) + "/" +
            std::string(to_string(task))),
      level_(level),
      task_(task)
{
}

const AggregateCell& Aggregates::at(const GroupKey& key) const
{
    const auto it = cells.find(key);
    if (it == cells.end() || it->second.n_defined == 0) throw EmptyGroup(key);
    return it->second;
}

AggregateCell summarize(std::span<const std::optional<double>> ratios)
{
    AggregateCell cell;
    double sum = 0.0;
    for (const auto& r : ratios) {
        if (r) {
            sum += *r;
            ++cell.n_defined;
        } else {
            ++cell.n_undefined;
        }
    }
    if (cell.n_defined == 0) {
        return cell;
    }
    cell.mean = sum / static_cast<double>(cell.n_defined);
    if (cell.n_defined > 1) {
        double squares = 0.0;
        for (const auto& r : ratios) {
            if (r) squares += (*r - cell.mean) * (*r - cell.mean);
        }
        cell.std = std::sqrt(squares / static_cast<double>(cell.n_defined - 1));
    }
    return cell;
}

Aggregates aggregate(std::span<const RunMeasurement> measurements)
{
    if (measurements.empty()) throw Error("aggregate: no measurements");
    std::map<GroupKey, std::vector<std::optional<double>>> groups;
    for (const auto& m : measurements) {
        groups[{m.model_id, m.level, m.task, m.condition}].push_back(m.ratio);
    }
    Aggregates out;
    for (const auto& [key, ratios] : groups) {
        out.cells.emplace(key, summarize(ratios));
    }
    return out;
}

std::vector<GainRow> gain_table(const Aggregates& aggregates)
{
    std::vector<GainRow> rows;
    const GroupKey* previous = nullptr;
    for (const auto& [key, cell] : aggregates.cells) {
        // Map order is (model, level, task, condition), so both conditions of a
        // pair are adjacent.
        if (previous && previous->model_id == key.model_id && previous->level == key.level &&
            previous->task == key.task) {
            continue;
        }
        previous = &key;
        GroupKey with_key{key.model_id, key.level, key.task, PromptCondition::with_list};
        GroupKey without_key{key.model_id, key.level, key.task, PromptCondition::without_list};
        if (!aggregates.has(with_key) || !aggregates.has(without_key)) {
            throw MissingCondition(key.model_id, key.level, key.task);
        }
        const AggregateCell& with = aggregates.at(with_key);
        const AggregateCell& without = aggregates.at(without_key);
        rows.push_back({key.model_id, key.level, key.task, without.mean, without.std, with.mean, with.std,
                        without.mean - with.mean});
    }
    return rows;
}

std::optional<TableFormat> parse_table_format(std::string_view text) noexcept
{
    if (text == "csv") return TableFormat::csv;
    if (text == "markdown" || text == "md") return TableFormat::markdown;
    if (text == "json") return TableFormat::json;
    return std::nullopt;
}

TableFormat table_format_from_string(std::string_view text)
{
    if (auto f = parse_table_format(text)) return *f;
    throw Error("unknown table format '" + std::string(text) + "' (expected csv, markdown or json)");
}

std::string format_percent(double fraction, DecimalLocale locale)
{
    double pct = fraction * 100.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", pct);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    if (locale == DecimalLocale::comma) {
        for (char& c : s) {
            if (c == '.') c = ',';
        }
        return s + " %";
    }
    return s + "%";
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string render_csv(std::span<const GainRow> rows, DecimalLocale locale)
{
    std::ostringstream os;
    os << "model,level,task,mean_without,std_without,mean_with,std_with,gain\n";
    for (const auto& r : rows) {
        const auto pct = [&](double v) { return csv_field(format_percent(v, locale)); };
        os << csv_field(r.model_id) << ',' << to_string(r.level) << ',' << to_string(r.task) << ','
           << pct(r.mean_without) << ',' << pct(r.std_without) << ',' << pct(r.mean_with) << ','
           << pct(r.std_with) << ',' << pct(r.gain) << '\n';
    }
    return os.str();
}

std::string render_markdown(std::span<const GainRow> rows, DecimalLocale locale)
{
    std::ostringstream os;
    os << "| Model | Level | Task | Mean (list not given) | Std | Mean (list given) | Std | Gain with list |\n";
    os << "|---|---|---|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        std::string gain = format_percent(r.gain, locale);
        // negative gains (the list made things worse) are bolded
        if (gain.front() == '-') gain = "**" + gain + "**";
        os << "| " << r.model_id << " | " << to_string(r.level) << " | " << to_string(r.task) << " | "
           << format_percent(r.mean_without, locale) << " | " << format_percent(r.std_without, locale) << " | "
           << format_percent(r.mean_with, locale) << " | " << format_percent(r.std_with, locale) << " | " << gain
           << " |\n";
    }
    return os.str();
}

nlohmann::json rows_to_json(std::span<const GainRow> rows)
{
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({
            {"model", r.model_id},
            {"level", to_string(r.level)},
            {"task", to_string(r.task)},
            {"mean_without", r.mean_without},
            {"std_without", r.std_without},
            {"mean_with", r.mean_with},
            {"std_with", r.std_with},
            {"gain", r.gain},
            {"negative_gain", format_percent(r.gain).front() == '-'},
        });
    }
    return {{"rows", std::move(arr)}};
}

} // namespace

std::string render_table(std::span<const GainRow> rows, TableFormat format, DecimalLocale locale)
{
    if (rows.empty()) throw Error("render_table: no rows");
    switch (format) {
    case TableFormat::csv: return render_csv(rows, locale);
    case TableFormat::markdown: return render_markdown(rows, locale);
    case TableFormat::json: return rows_to_json(rows).dump(2) + "\n";
    }
    return {};
}

std::vector<GainRow> rows_from_json(const nlohmann::json& j)
{
    std::vector<GainRow> rows;
    for (const auto& r : j.at("rows")) {
        rows.push_back({r.at("model").get<std::string>(),
                        level_from_string(r.at("level").get<std::string>()),
                        task_from_string(r.at("task").get<std::string>()),
                        r.at("mean_without").get<double>(),
                        r.at("std_without").get<double>(),
                        r.at("mean_with").get<double>(),
                        r.at("std_with").get<double>(),
                        r.at("gain").get<double>()});
    }
    return rows;
}

} // namespace sinogate
