#pragma once

#include <string>
#include <string_view>

#include "mmc/layout.hpp"

namespace mmc::layout {

// Plain-text answer script: problem statement lines up to the first blank
// line (joined with spaces), then one step per non-blank line. Leading blank
// lines are skipped.
AnswerScript parse_script_text(std::string_view text);

std::string format_script_text(const AnswerScript& script);

}  // namespace mmc::layout
