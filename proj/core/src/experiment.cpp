#include "sinogate/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <set>
#include <thread>

#include "sinogate/prompt.hpp"

namespace sinogate {

ExperimentPlan ExperimentPlan::default_plan(std::string model)
{
    ExperimentPlan plan;
    plan.models.push_back(std::move(model));
    return plan;
}

namespace {

template <typename T>
bool has_duplicates(const std::vector<T>& v)
{
    std::set<T> seen(v.begin(), v.end());
    return seen.size() != v.size();
}

} // namespace

void ExperimentPlan::validate() const
{
    if (runs_per_cell == 0) throw Error("plan: runs_per_cell must be >= 1");
    if (models.empty() || levels.empty() || tasks.empty() || conditions.empty()) {
        throw Error("plan: models, levels, tasks and conditions must be non-empty");
    }
    if (has_duplicates(models) || has_duplicates(levels) || has_duplicates(tasks) || has_duplicates(conditions)) {
        throw Error("plan: duplicate entries would produce duplicate cells");
    }
    if (!(params.temperature >= 0.0)) throw Error("plan: temperature must be >= 0");
}

ExperimentPlan plan_from_json(const nlohmann::json& j, const std::string& default_model)
{
    ExperimentPlan plan = ExperimentPlan::default_plan(default_model);
    if (j.contains("models")) plan.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("levels")) {
        plan.levels.clear();
        for (const auto& l : j.at("levels")) plan.levels.push_back(level_from_string(l.get<std::string>()));
    }
    if (j.contains("tasks")) {
        plan.tasks.clear();
        for (const auto& t : j.at("tasks")) plan.tasks.push_back(task_from_string(t.get<std::string>()));
    }
    if (j.contains("conditions")) {
        plan.conditions.clear();
        for (const auto& c : j.at("conditions")) plan.conditions.push_back(condition_from_string(c.get<std::string>()));
    }
    plan.runs_per_cell = j.value("runs_per_cell", plan.runs_per_cell);
    plan.params.temperature = j.value("temperature", plan.params.temperature);
    if (j.contains("max_output_tokens") && !j.at("max_output_tokens").is_null()) {
        plan.params.max_output_tokens = j.at("max_output_tokens").get<std::int64_t>();
    }
    if (j.contains("seed") && !j.at("seed").is_null()) plan.params.seed = j.at("seed").get<std::int64_t>();
    plan.validate();
    return plan;
}

nlohmann::json to_json(const ExperimentPlan& plan)
{
    nlohmann::json j;
    j["models"] = plan.models;
    j["levels"] = nlohmann::json::array();
    for (auto l : plan.levels) j["levels"].push_back(to_string(l));
    j["tasks"] = nlohmann::json::array();
    for (auto t : plan.tasks) j["tasks"].push_back(to_string(t));
    j["conditions"] = nlohmann::json::array();
    for (auto c : plan.conditions) j["conditions"].push_back(to_string(c));
    j["runs_per_cell"] = plan.runs_per_cell;
    j["temperature"] = plan.params.temperature;
    j["max_output_tokens"] = plan.params.max_output_tokens ? nlohmann::json(*plan.params.max_output_tokens) : nullptr;
    j["seed"] = plan.params.seed ? nlohmann::json(*plan.params.seed) : nullptr;
    return j;
}

std::string run_label(ThresholdLevel level, TaskCode task, std::size_t run_index, std::size_t runs_per_cell)
{
    return "Level " + std::string(to_string(level)) + " Choice " + std::string(to_string(task)) + " Run " +
           std::to_string(run_index) + "/" + std::to_string(runs_per_cell);
}

std::vector<WorkItem> expand(const ExperimentPlan& plan)
{
    plan.validate();
    std::vector<WorkItem> items;
    items.reserve(plan.models.size() * plan.levels.size() * plan.tasks.size() * plan.conditions.size() *
                  plan.runs_per_cell);
    for (const auto& model : plan.models) {
        for (auto level : plan.levels) {
            for (auto task : plan.tasks) {
                for (auto condition : plan.conditions) {
                    for (std::size_t run = 1; run <= plan.runs_per_cell; ++run) {
                        items.push_back({{model, level, task, condition}, run, plan.runs_per_cell});
                    }
                }
            }
        }
    }
    return items;
}

CompletionRequest build_request(const WorkItem& item, const GenerationParams& params)
{
    CompletionRequest request;
    request.params = params;
    request.params.model_id = item.cell.model_id;
    request.turns.push_back({Role::system, build_system_prompt(item.cell.level, item.cell.condition).text});
    request.turns.push_back({Role::user, task_user_message(item.cell.task)});
    return request;
}

namespace {

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

ExecutionSummary execute(const ExperimentPlan& plan,
                         LlmClient& client,
                         RunStore& store,
                         const CharsetRegistry& charsets,
                         const ExecuteOptions& options)
{
    const auto items = expand(plan);
    ExecutionSummary summary;
    summary.planned = items.size();

    std::vector<const WorkItem*> pending;
    for (const auto& item : items) {
        if (store.has_ok(item.cell, item.run_index)) {
            ++summary.skipped;
        } else {
            pending.push_back(&item);
            summary.pending_labels.push_back(item.label());
        }
    }
    if (options.dry_run || pending.empty()) return summary;

    const auto clock = options.clock ? options.clock : utc_now;
    std::mutex summary_mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;

    const auto worker = [&] {
        for (;;) {
            {
                std::lock_guard lock(summary_mutex);
                if (fatal) return;
            }
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            const WorkItem& item = *pending[i];

            RunRecord record;
            record.cell = item.cell;
            record.run_index = item.run_index;
            record.label = item.label();
            const CompletionRequest request = build_request(item, plan.params);
            record.request_hash = request_hash(request);
            try {
                CompletionResponse response = client.complete(request, item.run_index - 1);
                record.response = std::move(response.content);
                record.usage = response.usage;
                record.attempts = response.attempts;
                record.truncated = response.truncated;
                record.deviation = deviation(record.response, charsets.at(item.cell.level));
                record.status = RunStatus::ok;
            } catch (const AuthMissing&) {
                std::lock_guard lock(summary_mutex);
                fatal = std::current_exception();
                return;
            } catch (const UpstreamFailure& e) {
                record.status = RunStatus::failed;
                record.error = e.what();
                record.attempts = e.attempts();
            } catch (const Error& e) {
                record.status = RunStatus::failed;
                record.error = e.what();
            }
            record.timestamp = clock();
            store.append(record);

            std::lock_guard lock(summary_mutex);
            ++summary.attempted;
            if (record.status == RunStatus::ok) {
                ++summary.ok;
                summary.usage += record.usage;
            } else {
                ++summary.failed;
            }
            if (options.on_record) options.on_record(record);
        }
    };

    const std::size_t threads =
        std::clamp<std::size_t>(options.parallelism.value_or(client.concurrency_limit()), 1, pending.size());
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (fatal) std::rethrow_exception(fatal);
    return summary;
}

std::vector<RunMeasurement> measurements(std::span<const RunRecord> records,
                                         const CharsetRegistry& charsets,
                                         CountingMode mode)
{
    std::vector<RunMeasurement> out;
    std::set<std::pair<CellId, std::size_t>> seen;
    for (const auto& r : records) {
        if (r.status != RunStatus::ok) continue;
        if (!seen.insert({r.cell, r.run_index}).second) continue;
        const auto d = deviation(r.response, charsets.at(r.cell.level), mode);
        out.push_back({r.cell.model_id, r.cell.level, r.cell.task, r.cell.condition, r.run_index, d.out_ratio});
    }
    return out;
}

std::vector<ModelReport> report(std::span<const RunRecord> records,
                                const CharsetRegistry& charsets,
                                TableFormat format,
                                DecimalLocale locale,
                                CountingMode mode)
{
    const auto all = measurements(records, charsets, mode);
    std::map<std::string, std::vector<RunMeasurement>> by_model;
    for (const auto& m : all) by_model[m.model_id].push_back(m);

    std::vector<ModelReport> out;
    for (const auto& [model, ms] : by_model) {
        ModelReport r;
        r.model_id = model;
        r.undefined_runs = static_cast<std::size_t>(
            std::count_if(ms.begin(), ms.end(), [](const RunMeasurement& m) { return !m.ratio; }));
        r.rows = gain_table(aggregate(ms));
        r.table = render_table(r.rows, format, locale);
        r.panels = plot_data(r.rows);
        r.svg = render_svg(r.panels, model);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace sinogate
