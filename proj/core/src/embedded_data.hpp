#pragma once

#include <string_view>

// Printed threshold lists and the tutor prompt template, embedded at build time.
namespace sinogate::embedded {

extern const std::string_view a1_list;
extern const std::string_view a1plus_list;
extern const std::string_view a2_list;
extern const std::string_view tutor_prompt;

} // namespace sinogate::embedded
