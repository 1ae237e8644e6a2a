#include <fstream>

#include "sinogate/experiment.hpp"

namespace sinogate {

nlohmann::json to_json(const RunRecord& r)
{
    return {
        {"model", r.cell.model_id},
        {"level", to_string(r.cell.level)},
        {"task", to_string(r.cell.task)},
        {"condition", to_string(r.cell.condition)},
        {"run", r.run_index},
        {"label", r.label},
        {"request_hash", r.request_hash},
        {"response", r.response},
        {"deviation", r.deviation ? to_json(*r.deviation) : nlohmann::json(nullptr)},
        {"status", r.status == RunStatus::ok ? "ok" : "failed"},
        {"ts", r.timestamp},
        {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)},
        {"usage", {{"input_tokens", r.usage.input_tokens}, {"output_tokens", r.usage.output_tokens}}},
        {"attempts", r.attempts},
        {"truncated", r.truncated},
    };
}

RunRecord record_from_json(const nlohmann::json& j)
{
    RunRecord r;
    r.cell = {j.at("model").get<std::string>(),
              level_from_string(j.at("level").get<std::string>()),
              task_from_string(j.at("task").get<std::string>()),
              condition_from_string(j.at("condition").get<std::string>())};
    r.run_index = j.at("run").get<std::size_t>();
    if (r.run_index == 0) throw Error("run index must be >= 1");
    r.label = j.value("label", std::string());
    r.request_hash = j.value("request_hash", std::string());
    r.response = j.value("response", std::string());
    if (j.contains("deviation") && !j.at("deviation").is_null()) r.deviation = deviation_from_json(j.at("deviation"));
    const auto status = j.at("status").get<std::string>();
    if (status == "ok") {
        r.status = RunStatus::ok;
    } else if (status == "failed") {
        r.status = RunStatus::failed;
    } else {
        throw Error("unknown run status '" + status + "'");
    }
    r.timestamp = j.value("ts", std::string());
    if (j.contains("error") && j.at("error").is_string()) r.error = j.at("error").get<std::string>();
    if (j.contains("usage")) {
        r.usage.input_tokens = j.at("usage").value("input_tokens", std::uint64_t{0});
        r.usage.output_tokens = j.at("usage").value("output_tokens", std::uint64_t{0});
    }
    r.attempts = j.value("attempts", std::size_t{0});
    r.truncated = j.value("truncated", false);
    return r;
}

StoreCorrupt::StoreCorrupt(const std::filesystem::path& path, std::size_t line, const std::string& detail)
    : Error("run store " + path.string() + " is corrupt at line " + std::to_string(line) + ": " + detail)
{
}

RunStore::RunStore(std::filesystem::path path) : path_(std::move(path))
{
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            RunRecord r = record_from_json(nlohmann::json::parse(line));
            if (r.status == RunStatus::ok) ok_index_[{r.cell, r.run_index}] = true;
            records_.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw StoreCorrupt(path_, number, e.what());
        }
    }
}

std::vector<RunRecord> RunStore::records() const
{
    std::lock_guard lock(mutex_);
    return records_;
}

bool RunStore::has_ok(const CellId& cell, std::size_t run_index) const
{
    std::lock_guard lock(mutex_);
    return ok_index_.contains({cell, run_index});
}

void RunStore::append(const RunRecord& record)
{
    std::lock_guard lock(mutex_);
    if (record.status == RunStatus::ok && ok_index_.contains({record.cell, record.run_index})) {
        throw Error("run store already holds an ok record for " + record.label);
    }
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to run store " + path_.string());
    if (record.status == RunStatus::ok) ok_index_[{record.cell, record.run_index}] = true;
    records_.push_back(record);
}

} // namespace sinogate
