#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alref/backends/interfaces.hpp"
#include "alref/prompting/audit.hpp"
#include "alref/prompting/templates.hpp"

namespace alref::prompting {

// Reply cache keyed by (template version, prompt hash, image hashes). Only
// replies that parsed successfully are stored. With a directory, entries
// persist as one JSON file per key.
class ReplyCache {
 public:
  ReplyCache() = default;
  explicit ReplyCache(std::filesystem::path dir);

  static std::string key(const std::string& template_id, const std::string& prompt,
                         const std::vector<std::string>& image_hashes);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& reply);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> memory_;
  std::optional<std::filesystem::path> dir_;
};

using ImageDump = std::function<void(const std::string& hash, const Raster& image)>;

struct LlmRequest {
  std::string stage;
  std::string template_name;
  TemplateVars vars;
  std::vector<const Raster*> images;
};

template <class T>
struct LlmOutcome {
  std::optional<T> value;
  int attempts = 0;
};

// Renders a template, sends it with up to `max_attempts` identical attempts
// until the parser accepts a reply, and records every exchange.
class LlmChannel {
 public:
  LlmChannel(backends::ChatVisionBackend& backend, const PromptLibrary& prompts, AuditLog* audit = nullptr,
             ReplyCache* cache = nullptr, int max_attempts = 3, ImageDump dump = {});

  int max_attempts() const { return max_attempts_; }
  AuditLog* audit() const { return audit_; }

  template <class T>
  LlmOutcome<T> ask(const LlmRequest& request, const std::function<std::optional<T>(const std::string&)>& parse) {
    LlmOutcome<T> outcome;
    exchange(request, [&](const std::string& reply, nlohmann::json& parsed) {
      auto value = parse(reply);
      if (!value) return false;
      parsed = *value;
      outcome.value = std::move(value);
      return true;
    }, outcome.attempts);
    return outcome;
  }

 private:
  void exchange(const LlmRequest& request, const std::function<bool(const std::string&, nlohmann::json&)>& accept,
                int& attempts);

  backends::ChatVisionBackend& backend_;
  const PromptLibrary& prompts_;
  AuditLog* audit_;
  ReplyCache* cache_;
  int max_attempts_;
  ImageDump dump_;
};

}  // namespace alref::prompting
