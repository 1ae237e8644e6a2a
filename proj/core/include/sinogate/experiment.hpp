#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sinogate/analysis.hpp"
#include "sinogate/charset.hpp"
#include "sinogate/llmclient.hpp"
#include "sinogate/stats.hpp"
#include "sinogate/task.hpp"

namespace sinogate {

/// The experiment matrix: models x levels x tasks x conditions x runs.
struct ExperimentPlan {
    std::vector<std::string> models;
    std::vector<ThresholdLevel> levels{all_levels.begin(), all_levels.end()};
    std::vector<TaskCode> tasks{all_tasks.begin(), all_tasks.end()};
    std::vector<PromptCondition> conditions{all_conditions.begin(), all_conditions.end()};
    std::size_t runs_per_cell = 10;
    /// model_id is ignored; each cell sets its own.
    GenerationParams params;

    /// Three levels, ten tasks, both conditions, ten runs, temperature 0.7.
    static ExperimentPlan default_plan(std::string model);

    /// Throws Error on runs_per_cell == 0, empty axes or duplicate entries.
    void validate() const;
};

ExperimentPlan plan_from_json(const nlohmann::json& j, const std::string& default_model);
nlohmann::json to_json(const ExperimentPlan& plan);

struct CellId {
    std::string model_id;
    ThresholdLevel level;
    TaskCode task;
    PromptCondition condition;

    friend auto operator<=>(const CellId&, const CellId&) = default;
};

/// "Level A1 Choice RW2 Run 3/10"
std::string run_label(ThresholdLevel level, TaskCode task, std::size_t run_index, std::size_t runs_per_cell);

struct WorkItem {
    CellId cell;
    std::size_t run_index; // 1-based
    std::size_t runs_per_cell;

    [[nodiscard]] std::string label() const { return run_label(cell.level, cell.task, run_index, runs_per_cell); }
};

/// Ordered by (model, level, task, condition, run) following the plan's axis order.
std::vector<WorkItem> expand(const ExperimentPlan& plan);

/// The single-turn request a work item sends: tutor prompt plus the task code.
CompletionRequest build_request(const WorkItem& item, const GenerationParams& params);

enum class RunStatus { ok, failed };

struct RunRecord {
    CellId cell;
    std::size_t run_index = 1;
    std::string label;
    std::string request_hash;
    std::string response;
    std::optional<DeviationReport> deviation;
    RunStatus status = RunStatus::ok;
    std::string timestamp;
    std::optional<std::string> error;
    Usage usage;
    std::size_t attempts = 0;
    bool truncated = false;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

class StoreCorrupt : public Error {
public:
    StoreCorrupt(const std::filesystem::path& path, std::size_t line, const std::string& detail);
};

/// Append-only JSONL file of run records. Appends are serialized.
class RunStore {
public:
    /// Loads existing records; creates nothing until the first append.
    explicit RunStore(std::filesystem::path path);

    [[nodiscard]] std::vector<RunRecord> records() const;
    [[nodiscard]] bool has_ok(const CellId& cell, std::size_t run_index) const;
    void append(const RunRecord& record);

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::vector<RunRecord> records_;
    std::map<std::pair<CellId, std::size_t>, bool> ok_index_;
};

struct ExecuteOptions {
    bool dry_run = false;
    /// Worker threads; defaults to the client's concurrency limit.
    std::optional<std::size_t> parallelism;
    std::function<std::string()> clock;
    /// Called after each item completes (from worker threads, serialized).
    std::function<void(const RunRecord&)> on_record;
};

struct ExecutionSummary {
    std::size_t planned = 0;
    std::size_t skipped = 0;
    std::size_t attempted = 0;
    std::size_t ok = 0;
    std::size_t failed = 0;
    /// Items that were (or, for a dry run, would be) sent.
    std::vector<std::string> pending_labels;
    Usage usage;
};

/// Runs every item without an ok record. Upstream failures are stored with
/// status failed; they do not stop the run. A missing API key does.
ExecutionSummary execute(const ExperimentPlan& plan,
                         LlmClient& client,
                         RunStore& store,
                         const CharsetRegistry& charsets,
                         const ExecuteOptions& options = {});

/// One measurement per ok record, deviation recomputed from the raw response.
std::vector<RunMeasurement> measurements(std::span<const RunRecord> records,
                                         const CharsetRegistry& charsets,
                                         CountingMode mode = CountingMode::occurrence);

struct ModelReport {
    std::string model_id;
    std::vector<GainRow> rows;
    std::string table;
    std::vector<PlotPanel> panels;
    std::string svg;
    std::size_t undefined_runs = 0;
};

/// One table and one plot per model, in model order. Throws MissingCondition.
std::vector<ModelReport> report(std::span<const RunRecord> records,
                                const CharsetRegistry& charsets,
                                TableFormat format,
                                DecimalLocale locale = DecimalLocale::period,
                                CountingMode mode = CountingMode::occurrence);

} // namespace sinogate
