#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "oracle.hpp"
#include "sinogate/charset.hpp"
#include "sinogate/experiment.hpp"
#include "sinogate/prompt.hpp"
#include "sinogate/stats.hpp"
#include "temp_dir.hpp"

using namespace sinogate;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args, std::map<std::string, std::string> env = {})
{
    std::ostringstream out;
    std::ostringstream err;
    env.emplace("HOME", "/nonexistent");
    const cli::EnvLookup lookup = [env](const std::string& k) -> std::optional<std::string> {
        const auto it = env.find(k);
        if (it == env.end()) return std::nullopt;
        return it->second;
    };
    const int code = cli::run(args, out, err, lookup);
    return {code, out.str(), err.str()};
}

std::string fixtures() { return (oracle::test_dir() / "fixtures" / "replay").string(); }
std::string plan() { return (oracle::test_dir() / "fixtures" / "replay_plan.json").string(); }

} // namespace

TEST(Cli, AnalyzeExample)
{
    const auto r = run({"analyze", "--level", "A1", "--text", "你好愉快"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("ratio: 25.00%"), std::string::npos);
    EXPECT_NE(r.out.find("offenders: 愉"), std::string::npos);
}

TEST(Cli, AnalyzeJsonRoundTrips)
{
    const auto r = run({"--json", "analyze", "--level", "A1", "--mode", "type", "--text", "你你好愉快愉"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    const auto report = deviation_from_json(j);
    EXPECT_EQ(report, deviation("你你好愉快愉", load_builtin(ThresholdLevel::A1), CountingMode::type));
    EXPECT_EQ(spans_from_json(j["spans"]).size(), 2u);
}

TEST(Cli, AnalyzeFileAndCustomList)
{
    TempDir dir;
    std::ofstream(dir.path / "t.txt") << "我们学习";
    std::ofstream(dir.path / "l.txt") << "我 们";
    const auto r = run({"analyze", "--level", "A2", "--file", (dir.path / "t.txt").string(), "--list-file",
                        (dir.path / "l.txt").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("50.00%"), std::string::npos);
}

TEST(Cli, AnalyzeWithoutHan)
{
    const auto r = run({"analyze", "--level", "A1", "--text", "hello"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("undefined"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo)
{
    for (const auto& args : std::vector<std::vector<std::string>>{
             {},
             {"analyze", "--level", "A1"},
             {"analyze", "--level", "Z9", "--text", "x"},
             {"analyze", "--level", "A1", "--text", "x", "--bogus"},
             {"frobnicate"},
             {"experiment", "report", "--format", "xls"}}) {
        const auto r = run(args);
        EXPECT_EQ(r.code, 2) << (args.empty() ? "" : args[0]);
        EXPECT_NE(r.err.find("Usage"), std::string::npos);
    }
}

TEST(Cli, HelpExitsZero)
{
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("analyze"), std::string::npos);
}

TEST(Cli, DomainErrorsExitOne)
{
    TempDir dir;
    std::ofstream(dir.path / "latin.txt") << "no han here";
    const auto r = run({"analyze", "--level", "A1", "--list-file", (dir.path / "latin.txt").string(), "--text", "x"});
    EXPECT_EQ(r.code, 1);
    const auto missing = run({"experiment", "report", "--store", (dir.path / "none.jsonl").string()});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("error:"), std::string::npos);
}

TEST(Cli, CharsetCommands)
{
    const auto v = run({"--json", "charset", "validate"});
    ASSERT_EQ(v.code, 0);
    const auto j = nlohmann::json::parse(v.out);
    EXPECT_EQ(j["lists"][0]["actual_count"], 249);
    EXPECT_EQ(j["gaps"][0]["pair"], "A1->A1plus");

    const auto show = run({"--json", "charset", "show", "--level", "A1plus"});
    EXPECT_EQ(nlohmann::json::parse(show.out)["count"], 317);

    const auto d = run({"charset", "diff", "--from", "A1", "--to", "A1plus"});
    EXPECT_EQ(d.code, 0);
    EXPECT_NE(d.out.find("打"), std::string::npos);
    EXPECT_NE(d.out.find("店"), std::string::npos);
}

TEST(Cli, PromptShow)
{
    const auto r = run({"prompt", "show", "--level", "A2", "--condition", "with_list"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("A2-level character list is:"), std::string::npos);
    const auto j = nlohmann::json::parse(run({"--json", "prompt", "show", "--level", "A1plus", "--condition",
                                              "without_list"})
                                             .out);
    EXPECT_TRUE(j["derived_by_deletion"].get<bool>());
    EXPECT_EQ(j["text"], build_system_prompt(ThresholdLevel::A1plus, PromptCondition::without_list).text);
    const auto tasks = nlohmann::json::parse(run({"prompt", "tasks"}).out);
    EXPECT_EQ(tasks.size(), 10u);
}

TEST(Cli, DryRunListsSixHundredLabels)
{
    TempDir dir;
    const auto store = (dir.path / "runs.jsonl").string();
    const auto r = run({"experiment", "run", "--dry-run", "--store", store});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    ASSERT_EQ(lines.size(), 600u);
    EXPECT_EQ(lines.back(), "Level A2 Choice IW3 Run 10/10");
    EXPECT_FALSE(std::filesystem::exists(store));
}

TEST(Cli, ReplayRunAndReport)
{
    TempDir dir;
    const auto store = (dir.path / "runs.jsonl").string();
    const auto r = run({"--json", "experiment", "run", "--plan", plan(), "--transport", "replay", "--fixtures",
                        fixtures(), "--store", store});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = nlohmann::json::parse(r.out);
    EXPECT_EQ(summary["ok"], 180);
    EXPECT_EQ(summary["network_calls"], 0);

    const auto csv = run({"experiment", "report", "--store", store, "--format", "csv", "--plot",
                          (dir.path / "plot.svg").string(), "--plot-data", (dir.path / "plot.json").string()});
    ASSERT_EQ(csv.code, 0) << csv.err;
    EXPECT_EQ(csv.out.rfind("model,level,task,", 0), 0u);
    EXPECT_TRUE(std::filesystem::exists(dir.path / "plot.svg"));
    EXPECT_EQ(nlohmann::json::parse(oracle::read_file(dir.path / "plot.json")).size(), 3u);

    const auto js = run({"experiment", "report", "--store", store, "--format", "json"});
    const auto rows = rows_from_json(nlohmann::json::parse(js.out));
    EXPECT_EQ(rows.size(), 30u);

    const auto md = run({"experiment", "report", "--store", store, "--locale", "comma"});
    EXPECT_NE(md.out.find(" %"), std::string::npos);

    // resuming does nothing
    const auto again = run({"--json", "experiment", "run", "--plan", plan(), "--transport", "replay", "--fixtures",
                            fixtures(), "--store", store});
    EXPECT_EQ(nlohmann::json::parse(again.out)["skipped"], 180);
}

TEST(Cli, ReportDryRunWritesNothing)
{
    TempDir dir;
    const auto store = (dir.path / "runs.jsonl").string();
    run({"experiment", "run", "--plan", plan(), "--transport", "replay", "--fixtures", fixtures(), "--store", store});
    const auto r = run({"--dry-run", "experiment", "report", "--store", store, "--plot",
                        (dir.path / "p.svg").string(), "--out-dir", (dir.path / "out").string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_FALSE(std::filesystem::exists(dir.path / "p.svg"));
    EXPECT_FALSE(std::filesystem::exists(dir.path / "out"));
}

TEST(Cli, AllFailuresExitOne)
{
    TempDir dir;
    const auto r = run({"experiment", "run", "--plan", plan(), "--transport", "replay", "--fixtures",
                        (dir.path / "empty").string(), "--store", (dir.path / "runs.jsonl").string()});
    EXPECT_EQ(r.code, 1);
}

TEST(Cli, LiveWithoutKeyIsDomainError)
{
    TempDir dir;
    const auto r = run({"experiment", "run", "--plan", plan(), "--store", (dir.path / "runs.jsonl").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("API key"), std::string::npos);
}

TEST(Cli, ServeDryRun)
{
    const auto r = run({"--dry-run", "serve", "--addr", "0.0.0.0:9000"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("0.0.0.0:9000"), std::string::npos);
}

TEST(Config, PrecedenceFlagEnvFile)
{
    TempDir dir;
    const auto file = dir.path / "config";
    std::ofstream(file) << "# comment\nmodel = from-file\nbase_url=http://file\napi_key=file-key\n";
    const std::map<std::string, std::string> env{{"SINOGATE_MODEL", "from-env"}};
    const cli::EnvLookup lookup = [env](const std::string& k) -> std::optional<std::string> {
        const auto it = env.find(k);
        return it == env.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
    const auto cfg = cli::Config::load(lookup, file);
    EXPECT_EQ(cfg.get("model", std::string("from-flag")), "from-flag");
    EXPECT_EQ(cfg.get("model"), "from-env");
    EXPECT_EQ(cfg.get("base_url"), "http://file");
    EXPECT_FALSE(cfg.get("store"));
    EXPECT_EQ(cfg.get_or("store", "runs.jsonl"), "runs.jsonl");
}

TEST(Config, FileFromEnvAndJsonFormat)
{
    TempDir dir;
    const auto file = dir.path / "c.json";
    std::ofstream(file) << R"({"model": "json-model", "concurrency": 4})";
    const cli::EnvLookup lookup = [file](const std::string& k) -> std::optional<std::string> {
        if (k == "SINOGATE_CONFIG") return file.string();
        return std::nullopt;
    };
    const auto cfg = cli::Config::load(lookup, std::nullopt);
    EXPECT_EQ(cfg.get("model"), "json-model");
    EXPECT_EQ(cfg.get("concurrency"), "4");
    EXPECT_EQ(cli::parse_config_text("a=1\n b = two \n#x=y\n"),
              (std::map<std::string, std::string>{{"a", "1"}, {"b", "two"}}));
}
