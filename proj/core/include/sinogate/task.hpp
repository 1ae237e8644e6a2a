#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "sinogate/error.hpp"

namespace sinogate {

/// The ten EBCL activity codes in menu order.
enum class TaskCode { RW1, RW2, RW3, RW4, RW5, PW1, PW2, IW1, IW2, IW3 };

inline constexpr std::array<TaskCode, 10> all_tasks{
    TaskCode::RW1, TaskCode::RW2, TaskCode::RW3, TaskCode::RW4, TaskCode::RW5,
    TaskCode::PW1, TaskCode::PW2, TaskCode::IW1, TaskCode::IW2, TaskCode::IW3};

std::string_view to_string(TaskCode code) noexcept;
std::optional<TaskCode> parse_task(std::string_view text) noexcept;

class UnknownTask : public Error {
public:
    explicit UnknownTask(std::string_view text);
};

/// Throws UnknownTask for anything outside the registry. Matching is exact.
TaskCode task_from_string(std::string_view text);

/// Whether the system prompt embeds the level's character list.
enum class PromptCondition { with_list, without_list };

inline constexpr std::array<PromptCondition, 2> all_conditions{
    PromptCondition::with_list, PromptCondition::without_list};

std::string_view to_string(PromptCondition condition) noexcept;
std::optional<PromptCondition> parse_condition(std::string_view text) noexcept;
PromptCondition condition_from_string(std::string_view text);

} // namespace sinogate
