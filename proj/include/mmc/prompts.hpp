#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmc::grading {

using Bindings = std::map<std::string, std::string>;

class TemplateError : public std::runtime_error {
 public:
  enum class Kind { UnknownTemplate, MissingPlaceholder };

  TemplateError(Kind kind, std::string message, std::string name);

  Kind kind() const noexcept { return kind_; }
  // Template id or placeholder name.
  const std::string& name() const noexcept { return name_; }

 private:
  Kind kind_;
  std::string name_;
};

// Prompt templates keyed by "<strategy>.phase<N>" with `{{name}}` placeholders.
// The built-in set is compiled from prompts/*.txt; a directory of files named
// "<strategy>.phase<N>.txt" overrides individual templates.
class PromptLibrary {
 public:
  static const PromptLibrary& builtin();
  // Built-in templates overlaid with every matching file under `dir`.
  static PromptLibrary with_overrides(const std::filesystem::path& dir);

  void set(std::string template_id, std::string text);
  bool contains(const std::string& template_id) const;
  const std::string& text(const std::string& template_id) const;  // throws UnknownTemplate
  std::vector<std::string> ids() const;

  // Substitutes every `{{name}}`. Substituted text is not rescanned.
  std::string render(const std::string& template_id, const Bindings& bindings) const;

 private:
  std::map<std::string, std::string> templates_;
};

// Renders from the built-in library.
std::string render_prompt(const std::string& template_id, const Bindings& bindings);

// Substitution over a raw template string.
std::string render_template(const std::string& text, const Bindings& bindings);

}  // namespace mmc::grading
