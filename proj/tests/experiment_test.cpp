#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <set>

#include "fakes.hpp"
#include "oracle.hpp"
#include "sinogate/experiment.hpp"
#include "sinogate/prompt.hpp"
#include "temp_dir.hpp"

using namespace sinogate;

namespace {

std::unique_ptr<LlmClient> scripted_client(std::shared_ptr<fakes::ScriptedPoster::State> state,
                                           std::size_t concurrency = 1)
{
    auto cfg = fakes::test_config();
    cfg.concurrency_limit = concurrency;
    return std::make_unique<LlmClient>(cfg, TransportMode::live, std::nullopt,
                                       std::make_unique<fakes::ScriptedPoster>(std::move(state)),
                                       [](std::chrono::milliseconds) {});
}

ExperimentPlan small_plan()
{
    ExperimentPlan p = ExperimentPlan::default_plan("gpt-4o");
    p.levels = {ThresholdLevel::A1};
    p.tasks = {TaskCode::RW1, TaskCode::RW2};
    p.runs_per_cell = 3;
    return p;
}

const std::string fixed_ts = "2024-06-01T00:00:00Z";

} // namespace

TEST(Plan, DefaultExpandsToSixHundredUniqueItems)
{
    const auto items = expand(ExperimentPlan::default_plan("gpt-4o"));
    ASSERT_EQ(items.size(), 600u);
    std::set<std::pair<CellId, std::size_t>> unique;
    const std::regex label(R"(Level (A1|A1plus|A2) Choice (RW[1-5]|PW[12]|IW[1-3]) Run ([1-9]|10)/10)");
    for (const auto& it : items) {
        unique.insert({it.cell, it.run_index});
        EXPECT_TRUE(std::regex_match(it.label(), label)) << it.label();
    }
    EXPECT_EQ(unique.size(), 600u);
    EXPECT_EQ(items.front().label(), "Level A1 Choice RW1 Run 1/10");
    EXPECT_EQ(items.back().label(), "Level A2 Choice IW3 Run 10/10");
}

TEST(Plan, ExpansionOrderIsNested)
{
    const auto items = expand(small_plan());
    ASSERT_EQ(items.size(), 12u);
    EXPECT_EQ(items[0].cell.condition, PromptCondition::with_list);
    EXPECT_EQ(items[2].run_index, 3u);
    EXPECT_EQ(items[3].cell.condition, PromptCondition::without_list);
    EXPECT_EQ(items[6].cell.task, TaskCode::RW2);
}

TEST(Plan, SizeIsProductOfAxes)
{
    ExperimentPlan p = ExperimentPlan::default_plan("a");
    p.models = {"a", "b"};
    p.runs_per_cell = 4;
    EXPECT_EQ(expand(p).size(), 2u * 3 * 10 * 2 * 4);
}

TEST(Plan, ValidateRejectsBadPlans)
{
    auto p = small_plan();
    p.runs_per_cell = 0;
    EXPECT_THROW(p.validate(), Error);
    auto q = small_plan();
    q.tasks = {TaskCode::RW1, TaskCode::RW1};
    EXPECT_THROW(q.validate(), Error);
    auto r = small_plan();
    r.models.clear();
    EXPECT_THROW(r.validate(), Error);
}

TEST(Plan, JsonRoundTrip)
{
    const auto p = small_plan();
    const auto back = plan_from_json(to_json(p), "other");
    EXPECT_EQ(back.models, p.models);
    EXPECT_EQ(back.levels, p.levels);
    EXPECT_EQ(back.tasks, p.tasks);
    EXPECT_EQ(back.runs_per_cell, 3u);
    EXPECT_DOUBLE_EQ(back.params.temperature, 0.7);
    EXPECT_EQ(plan_from_json(nlohmann::json::object(), "m").models, std::vector<std::string>{"m"});
}

TEST(Plan, RequestIsPromptPlusTaskCode)
{
    const auto items = expand(small_plan());
    const auto r = build_request(items[0], small_plan().params);
    ASSERT_EQ(r.turns.size(), 2u);
    EXPECT_EQ(r.turns[0].role, Role::system);
    EXPECT_EQ(r.turns[0].content, build_system_prompt(ThresholdLevel::A1, PromptCondition::with_list).text);
    EXPECT_EQ(r.turns[1].content, "RW1");
    EXPECT_EQ(r.params.model_id, "gpt-4o");
    EXPECT_DOUBLE_EQ(r.params.temperature, 0.7);
    // repeated runs of a cell send the same request
    EXPECT_EQ(request_hash(r), request_hash(build_request(items[1], small_plan().params)));
}

TEST(RunStore, RecordJsonRoundTrip)
{
    RunRecord r;
    r.cell = {"gpt-4o", ThresholdLevel::A1plus, TaskCode::IW2, PromptCondition::without_list};
    r.run_index = 7;
    r.label = "Level A1plus Choice IW2 Run 7/10";
    r.request_hash = "abc";
    r.response = "你好";
    r.deviation = deviation("你好", load_builtin(ThresholdLevel::A1plus));
    r.timestamp = fixed_ts;
    r.usage = {3, 4};
    r.attempts = 2;
    const auto back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(back.cell, r.cell);
    EXPECT_EQ(back.run_index, 7u);
    EXPECT_EQ(back.response, r.response);
    EXPECT_EQ(back.deviation, r.deviation);
    EXPECT_EQ(back.usage, r.usage);
    EXPECT_EQ(back.attempts, 2u);
    EXPECT_EQ(back.status, RunStatus::ok);
}

TEST(RunStore, CorruptLineIsReported)
{
    TempDir dir;
    const auto path = dir.path / "runs.jsonl";
    std::ofstream(path) << "{not json\n";
    EXPECT_THROW(RunStore{path}, StoreCorrupt);
}

TEST(Execute, DryRunTouchesNothing)
{
    TempDir dir;
    auto state = std::make_shared<fakes::ScriptedPoster::State>();
    auto client = scripted_client(state);
    RunStore store(dir.path / "runs.jsonl");
    const auto summary = execute(ExperimentPlan::default_plan("gpt-4o"), *client, store, CharsetRegistry{},
                                 {.dry_run = true});
    EXPECT_EQ(summary.planned, 600u);
    EXPECT_EQ(summary.pending_labels.size(), 600u);
    EXPECT_EQ(summary.pending_labels.back(), "Level A2 Choice IW3 Run 10/10");
    EXPECT_EQ(client->network_calls(), 0u);
    EXPECT_FALSE(std::filesystem::exists(dir.path / "runs.jsonl"));
}

TEST(Execute, RunsEverythingAndResumes)
{
    TempDir dir;
    const auto path = dir.path / "runs.jsonl";
    auto state = std::make_shared<fakes::ScriptedPoster::State>();
    state->fallback = {200, fakes::completion_body("你好愉快"), std::nullopt};
    // the fourth call (RW1 without list, run 1) fails permanently
    for (int i = 0; i < 3; ++i) state->script.push_back(state->fallback);
    state->script.push_back({400, "bad", std::nullopt});

    {
        auto client = scripted_client(state);
        RunStore store(path);
        const auto s = execute(small_plan(), *client, store, CharsetRegistry{}, {.clock = [] { return fixed_ts; }});
        EXPECT_EQ(s.planned, 12u);
        EXPECT_EQ(s.attempted, 12u);
        EXPECT_EQ(s.ok, 11u);
        EXPECT_EQ(s.failed, 1u);
        EXPECT_EQ(store.records().size(), 12u);
    }
    {
        auto client = scripted_client(state);
        RunStore store(path);
        EXPECT_EQ(store.records().size(), 12u);
        const auto s = execute(small_plan(), *client, store, CharsetRegistry{});
        EXPECT_EQ(s.skipped, 11u);
        EXPECT_EQ(s.attempted, 1u);
        EXPECT_EQ(s.ok, 1u);
        EXPECT_EQ(client->network_calls(), 1u);
        EXPECT_EQ(s.pending_labels, std::vector<std::string>{"Level A1 Choice RW1 Run 1/3"});
    }
    {
        auto client = scripted_client(state);
        RunStore store(path);
        const auto s = execute(small_plan(), *client, store, CharsetRegistry{});
        EXPECT_EQ(s.skipped, 12u);
        EXPECT_EQ(client->network_calls(), 0u);
    }
}

TEST(Execute, RecordsCarryDeviationAndSampleIndex)
{
    TempDir dir;
    auto state = std::make_shared<fakes::ScriptedPoster::State>();
    state->fallback = {200, fakes::completion_body("你好愉快"), std::nullopt};
    auto client = scripted_client(state);
    RunStore store(dir.path / "runs.jsonl");
    execute(small_plan(), *client, store, CharsetRegistry{});
    for (const auto& r : store.records()) {
        ASSERT_TRUE(r.deviation);
        EXPECT_DOUBLE_EQ(*r.deviation->out_ratio, 0.25);
        EXPECT_EQ(r.request_hash.size(), 64u);
        EXPECT_FALSE(r.timestamp.empty());
    }
}

TEST(Execute, ParallelWorkersRespectClientLimit)
{
    TempDir dir;
    auto state = std::make_shared<fakes::ScriptedPoster::State>();
    state->hold = std::chrono::milliseconds(5);
    auto client = scripted_client(state, 3);
    RunStore store(dir.path / "runs.jsonl");
    auto plan = small_plan();
    plan.runs_per_cell = 10;
    const auto s = execute(plan, *client, store, CharsetRegistry{}, {.parallelism = 6});
    EXPECT_EQ(s.ok, 40u);
    EXPECT_LE(state->max_in_flight.load(), 3);
    std::set<std::pair<CellId, std::size_t>> keys;
    for (const auto& r : store.records()) keys.insert({r.cell, r.run_index});
    EXPECT_EQ(keys.size(), 40u);
}

TEST(Execute, MissingKeyAbortsRun)
{
    TempDir dir;
    auto cfg = fakes::test_config();
    cfg.api_key.clear();
    LlmClient client(cfg, TransportMode::live, std::nullopt,
                     std::make_unique<fakes::ScriptedPoster>(std::make_shared<fakes::ScriptedPoster::State>()));
    RunStore store(dir.path / "runs.jsonl");
    EXPECT_THROW(execute(small_plan(), client, store, CharsetRegistry{}), AuthMissing);
    EXPECT_TRUE(store.records().empty());
}

TEST(Measurements, RecomputedDeviationMatchesStored)
{
    TempDir dir;
    auto client = std::make_unique<LlmClient>(fakes::test_config(), TransportMode::replay,
                                              oracle::test_dir() / "fixtures" / "replay");
    RunStore runs(dir.path / "runs.jsonl");
    auto plan = plan_from_json(nlohmann::json::parse(oracle::read_file(oracle::test_dir() / "fixtures" /
                                                                       "replay_plan.json")),
                               "gpt-4o");
    const CharsetRegistry charsets;
    const auto s = execute(plan, *client, runs, charsets);
    EXPECT_EQ(s.ok, 180u);
    const auto records = runs.records();
    const auto ms = measurements(records, charsets);
    ASSERT_EQ(ms.size(), records.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
        EXPECT_EQ(ms[i].ratio, records[i].deviation->out_ratio);
    }
    const auto reports = report(records, charsets, TableFormat::csv);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].rows.size(), 30u);
}

TEST(Measurements, FailedAndDuplicateRecordsAreIgnored)
{
    RunRecord ok;
    ok.cell = {"m", ThresholdLevel::A1, TaskCode::RW1, PromptCondition::with_list};
    ok.response = "你好";
    RunRecord failed = ok;
    failed.status = RunStatus::failed;
    failed.run_index = 2;
    const std::vector<RunRecord> records{ok, ok, failed};
    EXPECT_EQ(measurements(records, CharsetRegistry{}).size(), 1u);
}
