#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>

#include "CLI11.hpp"
#include "sinogate/analysis.hpp"
#include "sinogate/charset.hpp"
#include "sinogate/experiment.hpp"
#include "sinogate/llmclient.hpp"
#include "sinogate/prompt.hpp"
#include "sinogate/stats.hpp"
#include "sinogate/tutor.hpp"

namespace sinogate::cli {

namespace {

struct Flags {
    std::optional<std::string> config_file;
    bool json = false;
    bool dry_run = false;

    // analyze
    std::string level;
    std::string mode = "occurrence";
    std::optional<std::string> text;
    std::optional<std::string> file;
    std::optional<std::string> list_file;

    // charset
    bool cumulative = false;
    std::string from_level;
    std::string to_level;
    std::vector<std::string> custom_lists;

    // prompt
    std::string condition = "with_list";

    // experiment
    std::optional<std::string> plan;
    std::string transport = "live";
    std::optional<std::string> store;
    std::optional<std::string> fixtures;
    std::optional<std::string> model;
    std::optional<std::size_t> parallel;
    std::string format = "markdown";
    std::optional<std::string> plot;
    std::optional<std::string> plot_data;
    std::optional<std::string> out_dir;
    std::string locale = "period";

    // serve
    std::string addr = "127.0.0.1:8080";
    std::optional<std::string> sessions;
    std::optional<std::string> static_dir;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("cannot write " + path.string());
}

std::string join_chars(std::span<const HanChar> chars, std::string_view sep = "")
{
    std::string out;
    for (std::size_t i = 0; i < chars.size(); ++i) {
        if (i) out += sep;
        out += chars[i].utf8();
    }
    return out;
}

nlohmann::json chars_json(std::span<const HanChar> chars)
{
    auto arr = nlohmann::json::array();
    for (HanChar c : chars) arr.push_back(c.utf8());
    return arr;
}


ClientConfig client_config(const Config& config, const Flags& f)
{
    ClientConfig c;
    c.base_url = config.get_or("base_url", c.base_url);
    c.api_key = config.get_or("api_key", "");
    c.default_model = config.get_or("model", c.default_model, f.model);
    if (auto v = config.get("concurrency")) c.concurrency_limit = std::stoul(*v);
    if (auto v = config.get("timeout")) c.timeout = std::chrono::seconds(std::stol(*v));
    return c;
}

std::unique_ptr<LlmClient> make_client(const Config& config, const Flags& f)
{
    const auto mode = parse_transport_mode(f.transport);
    if (!mode) throw Error("unknown transport '" + f.transport + "'");
    std::optional<std::filesystem::path> fixtures;
    const auto fixture_dir = config.get("fixtures", f.fixtures);
    if (*mode != TransportMode::live) fixtures = fixture_dir.value_or("fixtures");
    return std::make_unique<LlmClient>(client_config(config, f), *mode, fixtures);
}

// ---------------------------------------------------------------------------

int cmd_analyze(const Flags& f, const Config&, std::ostream& out)
{
    const ThresholdLevel level = level_from_string(f.level);
    const auto mode = parse_counting_mode(f.mode);
    if (!mode) throw Error("unknown counting mode '" + f.mode + "'");
    const std::string text = f.text ? *f.text : read_file(*f.file);
    const ThresholdList list = f.list_file ? load_custom_file(*f.list_file, level) : load_builtin(level);

    const DeviationReport report = deviation(text, list, *mode);
    if (f.json) {
        nlohmann::json j = to_json(report);
        j["level"] = to_string(level);
        j["list_source"] = list.source_id();
        j["spans"] = to_json(annotate(text, list).spans);
        out << j.dump(2) << '\n';
        return exit_ok;
    }
    out << "level: " << to_string(level) << " (" << list.source_id() << ")\n";
    out << "counting mode: " << to_string(report.counting_mode) << '\n';
    out << "han characters: " << report.total_han << '\n';
    out << "out of list: " << report.out_count << '\n';
    out << "ratio: " << (report.out_ratio ? format_percent(*report.out_ratio) : std::string("undefined (no Han text)"))
        << '\n';
    out << "offenders: " << (report.out_unique.empty() ? std::string("none") : join_chars(report.out_unique, " "))
        << '\n';
    return exit_ok;
}

std::vector<ThresholdList> lists_for_validation(const Flags& f)
{
    std::vector<ThresholdList> lists;
    if (f.custom_lists.empty()) {
        for (auto l : all_levels) lists.push_back(load_builtin(l));
        return lists;
    }
    // LEVEL=PATH pairs; duplicates are allowed through so validate can report them
    for (const auto& spec : f.custom_lists) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw Error("--list expects LEVEL=PATH, got " + spec);
        const ThresholdLevel level = level_from_string(spec.substr(0, eq));
        const std::string path = spec.substr(eq + 1);
        std::vector<HanChar> chars;
        for (const auto& t : extract_han(read_file(path)).tokens) chars.push_back(t.character);
        if (chars.empty()) throw EmptyList();
        lists.emplace_back(level, std::move(chars), std::nullopt, path);
    }
    return lists;
}

int cmd_charset_validate(const Flags& f, std::ostream& out)
{
    const auto lists = lists_for_validation(f);
    const auto report = validate(lists);
    if (f.json) {
        out << to_json(report).dump(2) << '\n';
        return exit_ok;
    }
    for (const auto& l : report.lists) {
        out << to_string(l.level) << " [" << l.source_id << "]: " << l.actual_count << " characters ("
            << l.distinct_count << " distinct)";
        if (l.claimed_size) out << ", claimed " << *l.claimed_size;
        out << ", duplicates: " << (l.duplicates.empty() ? std::string("none") : join_chars(l.duplicates, " "))
            << '\n';
    }
    for (const auto& g : report.gaps) {
        out << "missing from " << to_string(g.higher) << " but present in " << to_string(g.lower) << ": "
            << (g.missing.empty() ? std::string("none") : join_chars(g.missing, " ")) << '\n';
    }
    return exit_ok;
}

int cmd_charset_show(const Flags& f, std::ostream& out)
{
    const ThresholdLevel level = level_from_string(f.level);
    const ThresholdList list = f.cumulative ? load_cumulative(level) : load_builtin(level);
    if (f.json) {
        out << nlohmann::json{{"level", to_string(level)},
                              {"source", list.source_id()},
                              {"count", list.size()},
                              {"characters", chars_json(list.characters())}}
                   .dump(2)
            << '\n';
        return exit_ok;
    }
    out << list.render() << '\n';
    return exit_ok;
}

int cmd_charset_diff(const Flags& f, std::ostream& out)
{
    const ThresholdList a = load_builtin(level_from_string(f.from_level));
    const ThresholdList b = load_builtin(level_from_string(f.to_level));
    const auto d = diff(a, b);
    if (f.json) {
        out << nlohmann::json{{"from", to_string(a.level())}, {"to", to_string(b.level())}, {"characters", chars_json(d)}}
                   .dump(2)
            << '\n';
        return exit_ok;
    }
    out << join_chars(d) << '\n';
    return exit_ok;
}

int cmd_prompt_show(const Flags& f, std::ostream& out)
{
    const SystemPrompt p = build_system_prompt(level_from_string(f.level), condition_from_string(f.condition));
    if (f.json) {
        out << nlohmann::json{{"level", to_string(p.level)},
                              {"condition", to_string(p.condition)},
                              {"derived_by_deletion", p.derived_by_deletion},
                              {"text", p.text}}
                   .dump(2)
            << '\n';
        return exit_ok;
    }
    out << p.text << '\n';
    return exit_ok;
}

int cmd_prompt_tasks(std::ostream& out)
{
    out << tasks_to_json().dump(2) << '\n';
    return exit_ok;
}

int cmd_experiment_run(const Flags& f, const Config& config, std::ostream& out, std::ostream& err)
{
    const std::string default_model = config.get_or("model", "gpt-4o", f.model);
    ExperimentPlan plan = f.plan ? plan_from_json(nlohmann::json::parse(read_file(*f.plan)), default_model)
                                 : ExperimentPlan::default_plan(default_model);
    plan.validate();

    const std::string store_path = config.get_or("store", "runs.jsonl", f.store);
    RunStore store(store_path);
    const CharsetRegistry charsets;

    if (f.dry_run) {
        ExecuteOptions opts;
        opts.dry_run = true;
        // The client is never called in a dry run; no fixtures or keys needed.
        LlmClient idle(client_config(config, f), TransportMode::live);
        const auto summary = execute(plan, idle, store, charsets, opts);
        if (f.json) {
            out << nlohmann::json{{"planned", summary.planned},
                                  {"skipped", summary.skipped},
                                  {"pending", summary.pending_labels}}
                       .dump(2)
                << '\n';
        } else {
            for (const auto& label : summary.pending_labels) out << label << '\n';
        }
        err << summary.planned << " planned, " << summary.skipped << " already done, " << summary.pending_labels.size()
            << " pending (dry run)\n";
        return exit_ok;
    }

    auto client = make_client(config, f);
    ExecuteOptions opts;
    opts.parallelism = f.parallel;
    opts.on_record = [&err](const RunRecord& r) {
        err << (r.status == RunStatus::ok ? "ok     " : "failed ") << r.cell.model_id << ' ' << r.label;
        if (r.status == RunStatus::ok && r.deviation && r.deviation->out_ratio) {
            err << "  " << format_percent(*r.deviation->out_ratio);
        }
        if (r.error) err << "  " << *r.error;
        err << '\n';
    };
    const auto summary = execute(plan, *client, store, charsets, opts);

    double cost = 0.0;
    if (auto price_path = config.get("price_table")) {
        const PriceTable prices = PriceTable::load(*price_path);
        for (const auto& m : plan.models) cost += prices.cost(m, summary.usage);
    }
    if (f.json) {
        out << nlohmann::json{{"planned", summary.planned},
                              {"skipped", summary.skipped},
                              {"attempted", summary.attempted},
                              {"ok", summary.ok},
                              {"failed", summary.failed},
                              {"input_tokens", summary.usage.input_tokens},
                              {"output_tokens", summary.usage.output_tokens},
                              {"network_calls", client->network_calls()},
                              {"estimated_cost_usd", cost}}
                   .dump(2)
            << '\n';
    } else {
        out << summary.planned << " planned, " << summary.skipped << " already done, " << summary.ok << " ok, "
            << summary.failed << " failed\n";
        out << "tokens: " << summary.usage.input_tokens << " in, " << summary.usage.output_tokens << " out\n";
        if (config.get("price_table")) out << "estimated cost: $" << cost << '\n';
    }
    if (summary.attempted > 0 && summary.ok == 0) return exit_domain_error;
    return exit_ok;
}

std::filesystem::path plot_path_for(const std::string& base, const std::string& model, std::size_t model_count)
{
    if (model_count == 1) return base;
    std::filesystem::path p(base);
    return p.parent_path() / (p.stem().string() + "-" + model + p.extension().string());
}

int cmd_experiment_report(const Flags& f, const Config& config, std::ostream& out)
{
    const auto format = table_format_from_string(f.format);
    const auto mode = parse_counting_mode(f.mode);
    if (!mode) throw Error("unknown counting mode '" + f.mode + "'");
    DecimalLocale locale = DecimalLocale::period;
    if (f.locale == "comma") {
        locale = DecimalLocale::comma;
    } else if (f.locale != "period") {
        throw Error("unknown locale '" + f.locale + "' (expected period or comma)");
    }

    const RunStore store(config.get_or("store", "runs.jsonl", f.store));
    const auto records = store.records();
    if (records.empty()) throw Error("run store " + store.path().string() + " has no records");
    const CharsetRegistry charsets;
    const auto reports = report(records, charsets, format, locale, *mode);

    const char* ext = format == TableFormat::csv ? ".csv" : format == TableFormat::json ? ".json" : ".md";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        if (format == TableFormat::markdown) out << "## " << r.model_id << "\n\n";
        out << r.table;
        if (r.undefined_runs > 0 && format != TableFormat::json) {
            out << (format == TableFormat::markdown ? "\n" : "# ") << r.undefined_runs
                << " run(s) without Han text excluded\n";
        }
        if (i + 1 < reports.size()) out << '\n';
        if (f.dry_run) continue;
        if (f.plot) write_file(plot_path_for(*f.plot, r.model_id, reports.size()), r.svg);
        if (f.plot_data) {
            write_file(plot_path_for(*f.plot_data, r.model_id, reports.size()), to_json(r.panels).dump(2) + "\n");
        }
        if (f.out_dir) {
            const std::filesystem::path dir(*f.out_dir);
            write_file(dir / (r.model_id + ext), r.table);
            write_file(dir / (r.model_id + ".svg"), r.svg);
        }
    }
    return exit_ok;
}

int cmd_serve(const Flags& f, const Config& config, std::ostream& out)
{
    const auto colon = f.addr.rfind(':');
    if (colon == std::string::npos) throw Error("--addr expects host:port");
    ServerOptions options;
    options.host = f.addr.substr(0, colon);
    options.port = std::stoi(f.addr.substr(colon + 1));
    if (f.static_dir) options.static_dir = *f.static_dir;

    const std::string sessions_dir = config.get_or("sessions", "sessions", f.sessions);
    if (f.dry_run) {
        out << "would serve on " << options.host << ':' << options.port << " with sessions in " << sessions_dir
            << " via " << f.transport << " transport\n";
        return exit_ok;
    }

    auto client = make_client(config, f);
    SessionStore store(sessions_dir);
    const CharsetRegistry charsets;
    TutorConfig tutor;
    tutor.default_model = client->config().default_model;
    if (auto models = config.get("models")) {
        std::string m;
        std::istringstream in(*models);
        while (std::getline(in, m, ',')) tutor.models.push_back(m);
    }
    TutorService service(*client, store, charsets, tutor);
    TutorServer server(service, options);
    const int port = server.bind();
    out << "serving on http://" << options.host << ':' << port << std::endl;
    server.serve();
    return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env)
{
    Flags f;
    CLI::App app{"Character-threshold compliance toolkit for Chinese tutoring prompts", "sinogate"};
    app.require_subcommand(1);
    app.add_option("--config", f.config_file, "Config file (key=value or JSON)");
    app.add_flag("--json", f.json, "Machine-readable output");
    app.add_flag("--dry-run", f.dry_run, "Do not call the model or write files");

    const auto level_validator = CLI::IsMember({"A1", "A1plus", "A1+", "A2"}, CLI::ignore_case);
    const auto mode_validator = CLI::IsMember({"occurrence", "type"});
    const auto condition_validator = CLI::IsMember({"with_list", "without_list"});

    auto* analyze = app.add_subcommand("analyze", "Measure out-of-list characters in a text");
    analyze->fallthrough();
    analyze->add_option("--level", f.level, "Threshold level")->required()->check(level_validator);
    analyze->add_option("--mode", f.mode, "occurrence or type")->check(mode_validator);
    auto* text_opt = analyze->add_option("--text", f.text, "Text to analyze");
    auto* file_opt = analyze->add_option("--file", f.file, "UTF-8 file to analyze")->check(CLI::ExistingFile);
    text_opt->excludes(file_opt);
    analyze->add_option("--list-file", f.list_file, "Custom threshold list instead of the builtin")
        ->check(CLI::ExistingFile);

    auto* charset = app.add_subcommand("charset", "Inspect the builtin threshold lists");
    charset->require_subcommand(1);
    charset->fallthrough();
    auto* validate_cmd = charset->add_subcommand("validate", "Counts, duplicates and level gaps");
    validate_cmd->fallthrough();
    validate_cmd->add_option("--list", f.custom_lists, "LEVEL=PATH custom list (repeatable)");
    auto* show_cmd = charset->add_subcommand("show", "Print a list");
    show_cmd->fallthrough();
    show_cmd->add_option("--level", f.level)->required()->check(level_validator);
    show_cmd->add_flag("--cumulative", f.cumulative, "Union of all levels up to --level");
    auto* diff_cmd = charset->add_subcommand("diff", "Characters in --from missing from --to");
    diff_cmd->fallthrough();
    diff_cmd->add_option("--from", f.from_level)->required()->check(level_validator);
    diff_cmd->add_option("--to", f.to_level)->required()->check(level_validator);

    auto* prompt = app.add_subcommand("prompt", "Render tutor system prompts");
    prompt->require_subcommand(1);
    prompt->fallthrough();
    auto* prompt_show = prompt->add_subcommand("show", "Print the system prompt");
    prompt_show->fallthrough();
    prompt_show->add_option("--level", f.level)->required()->check(level_validator);
    prompt_show->add_option("--condition", f.condition)->check(condition_validator);
    auto* prompt_tasks = prompt->add_subcommand("tasks", "Print the EBCL task registry as JSON");
    prompt_tasks->fallthrough();

    auto* experiment = app.add_subcommand("experiment", "Run and report the prompt-condition experiment");
    experiment->require_subcommand(1);
    experiment->fallthrough();
    auto* exp_run = experiment->add_subcommand("run", "Execute pending runs of a plan");
    exp_run->fallthrough();
    exp_run->add_option("--plan", f.plan, "Plan JSON file")->check(CLI::ExistingFile);
    exp_run->add_option("--transport", f.transport)->check(CLI::IsMember({"live", "record", "replay"}));
    exp_run->add_option("--store", f.store, "Run store (JSONL)");
    exp_run->add_option("--fixtures", f.fixtures, "Fixture directory for record/replay");
    exp_run->add_option("--model", f.model, "Model for the default plan");
    exp_run->add_option("--parallel", f.parallel, "Worker threads");
    auto* exp_report = experiment->add_subcommand("report", "Gain tables and plots from a run store");
    exp_report->fallthrough();
    exp_report->add_option("--store", f.store, "Run store (JSONL)");
    exp_report->add_option("--format", f.format)->check(CLI::IsMember({"csv", "markdown", "json"}));
    exp_report->add_option("--plot", f.plot, "Write an SVG bar chart");
    exp_report->add_option("--plot-data", f.plot_data, "Write plot data as JSON");
    exp_report->add_option("--out-dir", f.out_dir, "Write <model>.<ext> and <model>.svg here");
    exp_report->add_option("--locale", f.locale, "period or comma decimals")->check(CLI::IsMember({"period", "comma"}));
    exp_report->add_option("--mode", f.mode, "occurrence or type")->check(mode_validator);

    auto* serve = app.add_subcommand("serve", "Run the tutor HTTP API");
    serve->fallthrough();
    serve->add_option("--addr", f.addr, "host:port");
    serve->add_option("--sessions", f.sessions, "Session directory");
    serve->add_option("--static", f.static_dir, "Directory of UI assets to serve at /")->check(CLI::ExistingDirectory);
    serve->add_option("--transport", f.transport)->check(CLI::IsMember({"live", "record", "replay"}));
    serve->add_option("--fixtures", f.fixtures, "Fixture directory for record/replay");
    serve->add_option("--model", f.model, "Default model");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage_error;
    }

    try {
        const auto config = Config::load(env, f.config_file ? std::optional<std::filesystem::path>(*f.config_file)
                                                           : std::nullopt);
        if (analyze->parsed()) {
            if (!f.text && !f.file) {
                err << "error: analyze needs --text or --file\n\n" << analyze->help();
                return exit_usage_error;
            }
            return cmd_analyze(f, config, out);
        }
        if (validate_cmd->parsed()) return cmd_charset_validate(f, out);
        if (show_cmd->parsed()) return cmd_charset_show(f, out);
        if (diff_cmd->parsed()) return cmd_charset_diff(f, out);
        if (prompt_show->parsed()) return cmd_prompt_show(f, out);
        if (prompt_tasks->parsed()) return cmd_prompt_tasks(out);
        if (exp_run->parsed()) return cmd_experiment_run(f, config, out, err);
        if (exp_report->parsed()) return cmd_experiment_report(f, config, out);
        if (serve->parsed()) return cmd_serve(f, config, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain_error;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain_error;
    }
    err << app.help();
    return exit_usage_error;
}

} // namespace sinogate::cli
