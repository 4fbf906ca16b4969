#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace alref::prompting {

struct PromptTemplate {
  std::string name;
  int version = 1;
  std::string body;

  std::string id() const { return name + "@v" + std::to_string(version); }
};

using TemplateVars = std::map<std::string, std::string>;

// Named prompt templates with {{var}} placeholders. Built-in copies of the
// assets in prompts/ are compiled in; a directory of same-named .txt files
// overrides them.
class PromptLibrary {
 public:
  static PromptLibrary builtin();

  /// Replaces templates with any `<name>.txt` found in `dir`.
  void load_overrides(const std::filesystem::path& dir);
  void add(PromptTemplate t);

  const PromptTemplate& get(const std::string& name) const;
  bool contains(const std::string& name) const { return templates_.count(name) != 0; }

  /// Every placeholder must be bound; unknown placeholders are an error.
  std::string render(const std::string& name, const TemplateVars& vars) const;

  static PromptTemplate parse(const std::string& name, const std::string& text);

 private:
  std::map<std::string, PromptTemplate> templates_;
};

std::string render_template(const std::string& body, const TemplateVars& vars);

}  // namespace alref::prompting
