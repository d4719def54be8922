#include "mmc/prompts.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "builtin_prompts.hpp"

namespace mmc::grading {

TemplateError::TemplateError(Kind kind, std::string message, std::string name)
    : std::runtime_error(std::move(message)), kind_(kind), name_(std::move(name)) {}

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary library = [] {
    PromptLibrary lib;
    for (const auto& [id, text] : builtin_prompt_files()) lib.set(id, text);
    return lib;
  }();
  return library;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
  PromptLibrary lib = builtin();
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const auto& path = entry.path();
    if (!entry.is_regular_file() || path.extension() != ".txt") continue;
    const std::string id = path.stem().string();
    if (id.find(".phase") == std::string::npos) continue;
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    lib.set(id, buf.str());
  }
  return lib;
}

void PromptLibrary::set(std::string template_id, std::string text) {
  templates_[std::move(template_id)] = std::move(text);
}

bool PromptLibrary::contains(const std::string& template_id) const {
  return templates_.count(template_id) != 0;
}

const std::string& PromptLibrary::text(const std::string& template_id) const {
  auto it = templates_.find(template_id);
  if (it == templates_.end()) {
    throw TemplateError(TemplateError::Kind::UnknownTemplate, "unknown prompt template '" + template_id + "'",
                        template_id);
  }
  return it->second;
}

std::vector<std::string> PromptLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

std::string PromptLibrary::render(const std::string& template_id, const Bindings& bindings) const {
  return render_template(text(template_id), bindings);
}

std::string render_template(const std::string& text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t open = text.find("{{", i);
    if (open == std::string::npos) break;
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string::npos) break;

    std::string name = text.substr(open + 2, close - open - 2);
    const auto first = name.find_first_not_of(" \t");
    const auto last = name.find_last_not_of(" \t");
    name = first == std::string::npos ? std::string{} : name.substr(first, last - first + 1);

    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw TemplateError(TemplateError::Kind::MissingPlaceholder,
                          "no binding for placeholder '{{" + name + "}}'", name);
    }
    out.append(text, i, open - i);
    out += it->second;
    i = close + 2;
  }
  out.append(text, i, std::string::npos);
  return out;
}

std::string render_prompt(const std::string& template_id, const Bindings& bindings) {
  return PromptLibrary::builtin().render(template_id, bindings);
}

}  // namespace mmc::grading
