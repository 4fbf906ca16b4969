#include "alref/prompting/templates.hpp"

#include <sstream>

#include "alref/core/error.hpp"
#include "alref/io/files.hpp"

namespace alref::prompting {
namespace {

struct EmbeddedTemplate {
  const char* name;
  const char* text;
};

const EmbeddedTemplate kEmbedded[] = {
#include "embedded_prompts.inc"
};

}  // namespace

PromptTemplate PromptLibrary::parse(const std::string& name, const std::string& text) {
  PromptTemplate t;
  t.name = name;
  std::istringstream in(text);
  std::string line;
  std::string body;
  bool header = true;
  while (std::getline(in, line)) {
    if (header && line.rfind("#!", 0) == 0) {
      std::istringstream meta(line.substr(2));
      std::string key;
      meta >> key;
      if (key == "version") {
        if (!(meta >> t.version) || t.version < 1) fail(ErrorCode::config, "template " + name + ": bad version line");
      }
      continue;
    }
    header = false;
    body += line;
    body += '\n';
  }
  while (!body.empty() && body.back() == '\n') body.pop_back();
  if (body.empty()) fail(ErrorCode::config, "template " + name + " is empty");
  t.body = body;
  return t;
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  for (const auto& e : kEmbedded) lib.add(parse(e.name, e.text));
  return lib;
}

void PromptLibrary::load_overrides(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::config, "prompt directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    add(parse(entry.path().stem().string(), io::read_text(entry.path())));
  }
}

void PromptLibrary::add(PromptTemplate t) { templates_[t.name] = std::move(t); }

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) fail(ErrorCode::config, "unknown prompt template '" + name + "'");
  return it->second;
}

std::string PromptLibrary::render(const std::string& name, const TemplateVars& vars) const {
  try {
    return render_template(get(name).body, vars);
  } catch (const Error& e) {
    fail(e.code(), "template " + name + ": " + e.what());
  }
}

std::string render_template(const std::string& body, const TemplateVars& vars) {
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find("{{", pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    const auto close = body.find("}}", open + 2);
    if (close == std::string::npos) fail(ErrorCode::config, "unterminated placeholder");
    out.append(body, pos, open - pos);
    const std::string key = body.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end()) fail(ErrorCode::config, "unbound placeholder {{" + key + "}}");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

}  // namespace alref::prompting
