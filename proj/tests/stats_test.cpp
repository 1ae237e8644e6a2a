#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "sinogate/stats.hpp"

using namespace sinogate;

namespace {

RunMeasurement m(ThresholdLevel level, TaskCode task, PromptCondition cond, std::size_t run, std::optional<double> r,
                 std::string model = "gpt-4o")
{
    return {std::move(model), level, task, cond, run, r};
}

constexpr auto W = PromptCondition::with_list;
constexpr auto WO = PromptCondition::without_list;

double oracle_sample_std(const std::vector<double>& v)
{
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

} // namespace

TEST(Stats, SummarizeExample)
{
    const std::vector<std::optional<double>> v{0.08, 0.10, 0.12};
    const auto c = summarize(v);
    EXPECT_NEAR(c.mean, 0.10, 1e-12);
    EXPECT_NEAR(c.std, 0.02, 1e-12);
    EXPECT_EQ(c.n_defined, 3u);
}

TEST(Stats, SummarizeSkipsUndefined)
{
    const std::vector<std::optional<double>> v{0.2, std::nullopt, 0.4};
    const auto c = summarize(v);
    EXPECT_NEAR(c.mean, 0.3, 1e-12);
    EXPECT_EQ(c.n_defined, 2u);
    EXPECT_EQ(c.n_undefined, 1u);
    const std::vector<std::optional<double>> one{0.5};
    EXPECT_EQ(summarize(one).std, 0.0);
}

TEST(Stats, SummarizeMatchesOracleOnRandomSamples)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> v(2 + i % 12);
        for (auto& x : v) x = u(rng);
        std::vector<std::optional<double>> o(v.begin(), v.end());
        const auto c = summarize(o);
        EXPECT_NEAR(c.std, oracle_sample_std(v), 1e-12);
        EXPECT_GE(c.std, 0.0);
    }
}

TEST(Stats, AggregateAndGain)
{
    std::vector<RunMeasurement> ms{
        m(ThresholdLevel::A1, TaskCode::RW1, WO, 1, 0.10), m(ThresholdLevel::A1, TaskCode::RW1, WO, 2, 0.20),
        m(ThresholdLevel::A1, TaskCode::RW1, W, 1, 0.05), m(ThresholdLevel::A1, TaskCode::RW1, W, 2, 0.05),
        m(ThresholdLevel::A2, TaskCode::IW3, WO, 1, 0.01), m(ThresholdLevel::A2, TaskCode::IW3, W, 1, 0.03)};
    const auto agg = aggregate(ms);
    const auto rows = gain_table(agg);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].level, ThresholdLevel::A1);
    EXPECT_NEAR(rows[0].mean_without, 0.15, 1e-12);
    EXPECT_NEAR(rows[0].gain, 0.10, 1e-12);
    EXPECT_NEAR(rows[1].gain, -0.02, 1e-12);
    for (const auto& r : rows) EXPECT_DOUBLE_EQ(r.gain, r.mean_without - r.mean_with);
}

TEST(Stats, AllUndefinedGroupIsEmpty)
{
    std::vector<RunMeasurement> ms{m(ThresholdLevel::A1, TaskCode::RW1, WO, 1, std::nullopt),
                                   m(ThresholdLevel::A1, TaskCode::RW1, W, 1, 0.1)};
    const auto agg = aggregate(ms);
    const GroupKey key{"gpt-4o", ThresholdLevel::A1, TaskCode::RW1, WO};
    EXPECT_TRUE(agg.has(key));
    EXPECT_THROW((void)agg.at(key), EmptyGroup);
    EXPECT_THROW(gain_table(agg), EmptyGroup);
}

TEST(Stats, MissingConditionIsReported)
{
    std::vector<RunMeasurement> ms{m(ThresholdLevel::A1plus, TaskCode::PW2, W, 1, 0.1)};
    try {
        gain_table(aggregate(ms));
        FAIL();
    } catch (const MissingCondition& e) {
        EXPECT_EQ(e.level(), ThresholdLevel::A1plus);
        EXPECT_EQ(e.task(), TaskCode::PW2);
    }
    EXPECT_THROW(aggregate(std::vector<RunMeasurement>{}), Error);
}

TEST(Stats, FormatPercent)
{
    EXPECT_EQ(format_percent(0.0933), "9.33%");
    EXPECT_EQ(format_percent(0.0933, DecimalLocale::comma), "9,33 %");
    EXPECT_EQ(format_percent(-0.00001), "0.00%");
    EXPECT_EQ(format_percent(-0.0998, DecimalLocale::comma), "-9,98 %");
    EXPECT_EQ(format_percent(1.0), "100.00%");
}

namespace {

std::vector<GainRow> sample_rows()
{
    return {{"gpt-4o", ThresholdLevel::A1, TaskCode::RW1, 0.0933, 0.0136, 0.0688, 0.0196, 0.0245},
            {"gpt-4o", ThresholdLevel::A1plus, TaskCode::PW1, 0.0389, 0.0, 0.1387, 0.0, -0.0998}};
}

} // namespace

TEST(Stats, RenderCsv)
{
    const auto rows = sample_rows();
    EXPECT_EQ(render_table(rows, TableFormat::csv),
              "model,level,task,mean_without,std_without,mean_with,std_with,gain\n"
              "gpt-4o,A1,RW1,9.33%,1.36%,6.88%,1.96%,2.45%\n"
              "gpt-4o,A1plus,PW1,3.89%,0.00%,13.87%,0.00%,-9.98%\n");
}

TEST(Stats, RenderMarkdownBoldsNegativeGain)
{
    const auto md = render_table(sample_rows(), TableFormat::markdown, DecimalLocale::comma);
    EXPECT_NE(md.find("| gpt-4o | A1 | RW1 | 9,33 % |"), std::string::npos);
    EXPECT_NE(md.find("**-9,98 %**"), std::string::npos);
    EXPECT_EQ(md.find("**2,45 %**"), std::string::npos);
}

TEST(Stats, RenderJsonRoundTrips)
{
    const auto rows = sample_rows();
    const auto j = nlohmann::json::parse(render_table(rows, TableFormat::json));
    EXPECT_EQ(rows_from_json(j), rows);
    EXPECT_TRUE(j["rows"][1]["negative_gain"].get<bool>());
    EXPECT_THROW(render_table(std::vector<GainRow>{}, TableFormat::csv), Error);
}

TEST(Stats, RenderingIsDeterministic)
{
    const auto rows = sample_rows();
    for (auto f : {TableFormat::csv, TableFormat::markdown, TableFormat::json}) {
        EXPECT_EQ(render_table(rows, f), render_table(rows, f));
    }
    const auto panels = plot_data(rows);
    EXPECT_EQ(render_svg(panels, "t"), render_svg(panels, "t"));
}

TEST(Stats, PlotDataGroupsByModelAndLevel)
{
    const auto panels = plot_data(sample_rows());
    ASSERT_EQ(panels.size(), 2u);
    EXPECT_EQ(panels[0].level, ThresholdLevel::A1);
    ASSERT_EQ(panels[0].groups.size(), 1u);
    ASSERT_EQ(panels[0].groups[0].bars.size(), 2u);
    EXPECT_EQ(panels[0].groups[0].bars[0].condition, PromptCondition::without_list);
    EXPECT_DOUBLE_EQ(panels[0].groups[0].bars[1].mean, 0.0688);
    const auto svg = render_svg(panels, "gpt-4o");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("RW1"), std::string::npos);
    const auto j = to_json(panels);
    EXPECT_EQ(j.size(), 2u);
}

TEST(Stats, TableFormatNames)
{
    EXPECT_EQ(table_format_from_string("csv"), TableFormat::csv);
    EXPECT_EQ(parse_table_format("markdown"), TableFormat::markdown);
    EXPECT_FALSE(parse_table_format("xls"));
    EXPECT_THROW(table_format_from_string("xls"), Error);
}
