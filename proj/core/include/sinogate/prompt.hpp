#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sinogate/charset.hpp"
#include "sinogate/level.hpp"
#include "sinogate/task.hpp"

namespace sinogate {

/// One EBCL activity: its menu title and the A1/A2 "can do" descriptors.
struct TaskDescriptor {
    TaskCode code;
    std::string_view title;
    std::vector<std::string_view> a1;
    std::vector<std::string_view> a2;
};

/// Ten entries in menu order.
std::span<const TaskDescriptor> list_tasks();
const TaskDescriptor& describe(TaskCode code);

/// The simulated student's turn: the bare task code. Throws UnknownTask.
std::string task_user_message(std::string_view code);
std::string task_user_message(TaskCode code);

nlohmann::json tasks_to_json();

struct SystemPrompt {
    ThresholdLevel level;
    PromptCondition condition;
    std::string text;
    /// True for the without-list prompts of A1plus and A2, which are produced
    /// by deleting the list block rather than transcribed from a printed source.
    bool derived_by_deletion = false;
};

/// "A1-level", "A1+ level" or "A2-level", as the prompt prose spells them.
std::string_view level_phrase(ThresholdLevel level) noexcept;

SystemPrompt build_system_prompt(ThresholdLevel level, PromptCondition condition);

/// Renders the tutor prompt around an arbitrary list (custom substitutions).
SystemPrompt build_system_prompt(const ThresholdList& list, PromptCondition condition);

/// The "<level> character list is: ..." paragraph including its trailing blank line.
std::string list_block(const ThresholdList& list);

} // namespace sinogate
