#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sinogate/stats.hpp"

namespace sinogate {

std::vector<PlotPanel> plot_data(std::span<const GainRow> rows)
{
    std::vector<PlotPanel> panels;
    for (const auto& r : rows) {
        if (panels.empty() || panels.back().model_id != r.model_id || panels.back().level != r.level) {
            panels.push_back({r.model_id, r.level, {}});
        }
        panels.back().groups.push_back({r.task,
                                        {{PromptCondition::without_list, r.mean_without, r.std_without},
                                         {PromptCondition::with_list, r.mean_with, r.std_with}}});
    }
    return panels;
}

nlohmann::json to_json(std::span<const PlotPanel> panels)
{
    auto out = nlohmann::json::array();
    for (const auto& p : panels) {
        auto groups = nlohmann::json::array();
        for (const auto& g : p.groups) {
            auto bars = nlohmann::json::array();
            for (const auto& b : g.bars) {
                bars.push_back({{"condition", to_string(b.condition)}, {"mean", b.mean}, {"std", b.std}});
            }
            groups.push_back({{"task", to_string(g.task)}, {"bars", std::move(bars)}});
        }
        out.push_back({{"model", p.model_id}, {"level", to_string(p.level)}, {"groups", std::move(groups)}});
    }
    return out;
}

namespace {

constexpr double panel_width = 420.0;
constexpr double panel_height = 320.0;
constexpr double margin_left = 52.0;
constexpr double margin_right = 12.0;
constexpr double margin_top = 48.0;
constexpr double margin_bottom = 56.0;
constexpr double legend_height = 28.0;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string_view bar_colour(PromptCondition c)
{
    return c == PromptCondition::with_list ? "#2a9d8f" : "#b0b0b0";
}

// Upper bound of the y axis in percent: next multiple of 5 above every bar
// including its error whisker.
double axis_max_percent(std::span<const PlotPanel> panels)
{
    double top = 0.0;
    for (const auto& p : panels) {
        for (const auto& g : p.groups) {
            for (const auto& b : g.bars) top = std::max(top, (b.mean + b.std) * 100.0);
        }
    }
    return std::max(5.0, std::ceil(top / 5.0) * 5.0);
}

} // namespace

std::string render_svg(std::span<const PlotPanel> panels, std::string_view title)
{
    const double width = panel_width * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
    const double height = panel_height + legend_height;
    const double y_max = axis_max_percent(panels);
    const double plot_h = panel_height - margin_top - margin_bottom;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    if (!title.empty()) {
        os << "<text x=\"" << num(width / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
           << escape(title) << "</text>\n";
    }

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const PlotPanel& panel = panels[pi];
        const double x0 = panel_width * static_cast<double>(pi) + margin_left;
        const double plot_w = panel_width - margin_left - margin_right;
        const double base_y = margin_top + plot_h;
        const auto y_of = [&](double fraction) { return base_y - fraction * 100.0 / y_max * plot_h; };

        os << "<g class=\"panel\" data-model=\"" << escape(panel.model_id) << "\" data-level=\""
           << to_string(panel.level) << "\">\n";
        os << "<text x=\"" << num(x0 + plot_w / 2) << "\" y=\"" << num(margin_top - 12)
           << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(panel.model_id) << " "
           << to_string(panel.level) << "</text>\n";

        // y axis with gridlines every 5 percentage points
        for (double tick = 0.0; tick <= y_max + 1e-9; tick += 5.0) {
            const double y = y_of(tick / 100.0);
            os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x0 + plot_w) << "\" y2=\""
               << num(y) << "\" stroke=\"#e5e5e5\"/>\n";
            os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 4)
               << "\" text-anchor=\"end\" font-size=\"10\">" << num(tick).substr(0, num(tick).size() - 3)
               << "%</text>\n";
        }
        os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(base_y) << "\" x2=\"" << num(x0 + plot_w)
           << "\" y2=\"" << num(base_y) << "\" stroke=\"#333333\"/>\n";
        os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(margin_top) << "\" x2=\"" << num(x0) << "\" y2=\""
           << num(base_y) << "\" stroke=\"#333333\"/>\n";

        const double group_w = panel.groups.empty() ? plot_w : plot_w / static_cast<double>(panel.groups.size());
        for (std::size_t gi = 0; gi < panel.groups.size(); ++gi) {
            const PlotGroup& group = panel.groups[gi];
            const double gx = x0 + group_w * static_cast<double>(gi);
            const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(group.bars.size(), 1));
            for (std::size_t bi = 0; bi < group.bars.size(); ++bi) {
                const PlotBar& bar = group.bars[bi];
                const double bx = gx + group_w * 0.1 + bar_w * static_cast<double>(bi);
                const double top = y_of(std::max(bar.mean, 0.0));
                os << "<rect x=\"" << num(bx) << "\" y=\"" << num(top) << "\" width=\"" << num(bar_w)
                   << "\" height=\"" << num(base_y - top) << "\" fill=\"" << bar_colour(bar.condition)
                   << "\"><title>" << to_string(group.task) << ' ' << to_string(bar.condition) << ": "
                   << format_percent(bar.mean) << " (std " << format_percent(bar.std) << ")</title></rect>\n";
                if (bar.std > 0.0) {
                    const double cx = bx + bar_w / 2;
                    const double lo = y_of(std::max(bar.mean - bar.std, 0.0));
                    const double hi = y_of(bar.mean + bar.std);
                    os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(cx) << "\" y2=\""
                       << num(hi) << "\" stroke=\"#333333\"/>\n";
                }
            }
            os << "<text x=\"" << num(gx + group_w / 2) << "\" y=\"" << num(base_y + 14)
               << "\" text-anchor=\"middle\" font-size=\"10\">" << to_string(group.task) << "</text>\n";
        }
        os << "</g>\n";
    }

    const double ly = panel_height + 8;
    os << "<rect x=\"" << num(margin_left) << "\" y=\"" << num(ly) << "\" width=\"12\" height=\"12\" fill=\""
       << bar_colour(PromptCondition::without_list) << "\"/>\n";
    os << "<text x=\"" << num(margin_left + 18) << "\" y=\"" << num(ly + 10)
       << "\" font-size=\"11\">list not given</text>\n";
    os << "<rect x=\"" << num(margin_left + 120) << "\" y=\"" << num(ly) << "\" width=\"12\" height=\"12\" fill=\""
       << bar_colour(PromptCondition::with_list) << "\"/>\n";
    os << "<text x=\"" << num(margin_left + 138) << "\" y=\"" << num(ly + 10)
       << "\" font-size=\"11\">list given</text>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace sinogate
