#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "mmc/grading.hpp"

namespace mmc::grading {

// RFC 3339 UTC with millisecond precision, e.g. "2026-10-16T08:30:00.125Z".
std::string format_timestamp(Clock::time_point t);
// Accepts "Z" or numeric offsets and optional fractional seconds.
Clock::time_point parse_timestamp(std::string_view text);

nlohmann::json to_json(const StepVerdict& v);
nlohmann::json to_json(const PromptExchange& e);
nlohmann::json to_json(const GradingReport& r);

// Throws std::invalid_argument on missing or mistyped fields.
StepVerdict step_verdict_from_json(const nlohmann::json& j);
PromptExchange exchange_from_json(const nlohmann::json& j);
GradingReport report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StrategyConfig& c);

}  // namespace mmc::grading
