#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sinogate/error.hpp"
#include "sinogate/level.hpp"
#include "sinogate/task.hpp"

namespace sinogate {

/// The out-of-list ratio of one run. `ratio` is unset for runs without Han text.
struct RunMeasurement {
    std::string model_id;
    ThresholdLevel level;
    TaskCode task;
    PromptCondition condition;
    std::size_t run_index = 1;
    std::optional<double> ratio;
};

struct GroupKey {
    std::string model_id;
    ThresholdLevel level;
    TaskCode task;
    PromptCondition condition;

    friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

/// mean and sample standard deviation (n - 1) over the defined ratios.
struct AggregateCell {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n_defined = 0;
    std::size_t n_undefined = 0;
};

class EmptyGroup : public Error {
public:
    explicit EmptyGroup(const GroupKey& key);
};

class MissingCondition : public Error {
public:
    MissingCondition(std::string model_id, ThresholdLevel level, TaskCode task);
    ThresholdLevel level() const noexcept { return level_; }
    TaskCode task() const noexcept { return task_; }

private:
    ThresholdLevel level_;
    TaskCode task_;
};

/// Cells keyed by (model, level, task, condition). Groups whose ratios are all
/// undefined are kept (so they can be reported) but at() refuses them.
class Aggregates {
public:
    std::map<GroupKey, AggregateCell> cells;

    /// Throws EmptyGroup for a group with zero defined ratios or no entry.
    [[nodiscard]] const AggregateCell& at(const GroupKey& key) const;
    [[nodiscard]] bool has(const GroupKey& key) const { return cells.contains(key); }
};

/// Summary of one group. Throws EmptyGroup when no ratio is defined.
AggregateCell summarize(std::span<const std::optional<double>> ratios);

/// Throws Error on empty input.
Aggregates aggregate(std::span<const RunMeasurement> measurements);

struct GainRow {
    std::string model_id;
    ThresholdLevel level;
    TaskCode task;
    double mean_without = 0.0;
    double std_without = 0.0;
    double mean_with = 0.0;
    double std_with = 0.0;
    /// mean_without - mean_with; positive means the embedded list helped.
    double gain = 0.0;

    friend bool operator==(const GainRow&, const GainRow&) = default;
};

/// One row per (model, level, task) present, ordered model, level, task.
/// Throws MissingCondition when either condition is absent for a pair.
std::vector<GainRow> gain_table(const Aggregates& aggregates);

enum class TableFormat { csv, markdown, json };
std::optional<TableFormat> parse_table_format(std::string_view text) noexcept;
TableFormat table_format_from_string(std::string_view text);

/// period: "9.33%". comma: "9,33 %", as French-locale tables print it.
enum class DecimalLocale { period, comma };

/// Percentage with two decimals; never prints "-0.00".
std::string format_percent(double fraction, DecimalLocale locale = DecimalLocale::period);

/// Deterministic rendering. Throws Error on empty rows.
std::string render_table(std::span<const GainRow> rows, TableFormat format,
                         DecimalLocale locale = DecimalLocale::period);

std::vector<GainRow> rows_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Grouped-bar plot data: one panel per (model, level), one group per task,
// one bar per condition.

struct PlotBar {
    PromptCondition condition;
    double mean;
    double std;
};

struct PlotGroup {
    TaskCode task;
    std::vector<PlotBar> bars;
};

struct PlotPanel {
    std::string model_id;
    ThresholdLevel level;
    std::vector<PlotGroup> groups;
};

std::vector<PlotPanel> plot_data(std::span<const GainRow> rows);
nlohmann::json to_json(std::span<const PlotPanel> panels);

/// Deterministic SVG with the panels laid out left to right.
std::string render_svg(std::span<const PlotPanel> panels, std::string_view title = {});

} // namespace sinogate
