#include "mmc/script_format.hpp"

#include "utf8.hpp"

namespace mmc::layout {

AnswerScript parse_script_text(std::string_view text) {
  AnswerScript script;
  bool in_problem = true;
  bool seen_problem_line = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = utf8::trim(text.substr(start, end - start));
    start = end + 1;

    if (in_problem) {
      if (line.empty()) {
        if (seen_problem_line) in_problem = false;
        continue;
      }
      if (!script.problem.empty()) script.problem += ' ';
      script.problem += line;
      seen_problem_line = true;
    } else if (!line.empty()) {
      script.steps.push_back(line);
    }
  }
  return script;
}

std::string format_script_text(const AnswerScript& script) {
  std::string out = script.problem + "\n\n";
  for (const auto& step : script.steps) out += step + "\n";
  return out;
}

}  // namespace mmc::layout
