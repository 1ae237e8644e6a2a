#include "sinogate/prompt.hpp"

#include "embedded_data.hpp"

namespace sinogate {

namespace {

constexpr std::string_view level_placeholder = "{{LEVEL}}";
constexpr std::string_view list_placeholder = "{{LIST_BLOCK}}";

void replace_all(std::string& s, std::string_view from, std::string_view to)
{
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
}

// The printed A1 list ends with a full stop; the A1+ and A2 lists do not.
std::string_view list_terminator(ThresholdLevel level)
{
    return level == ThresholdLevel::A1 ? "." : "";
}

} // namespace

std::string_view level_phrase(ThresholdLevel level) noexcept
{
    switch (level) {
    case ThresholdLevel::A1: return "A1-level";
    case ThresholdLevel::A1plus: return "A1+ level";
    case ThresholdLevel::A2: return "A2-level";
    }
    return "";
}

std::string list_block(const ThresholdList& list)
{
    std::string block(level_phrase(list.level()));
    block += " character list is: ";
    block += list.render();
    block += list_terminator(list.level());
    block += "\n\n";
    return block;
}

SystemPrompt build_system_prompt(const ThresholdList& list, PromptCondition condition)
{
    std::string text(embedded::tutor_prompt);
    replace_all(text, list_placeholder, condition == PromptCondition::with_list ? list_block(list) : "");
    replace_all(text, level_placeholder, level_phrase(list.level()));
    const bool derived = condition == PromptCondition::without_list && list.level() != ThresholdLevel::A1;
    return {list.level(), condition, std::move(text), derived};
}

SystemPrompt build_system_prompt(ThresholdLevel level, PromptCondition condition)
{
    return build_system_prompt(load_builtin(level), condition);
}

std::string task_user_message(TaskCode code)
{
    return std::string(to_string(code));
}

std::string task_user_message(std::string_view code)
{
    return task_user_message(task_from_string(code));
}

} // namespace sinogate
