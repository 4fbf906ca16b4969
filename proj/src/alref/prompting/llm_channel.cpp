#include "alref/prompting/llm_channel.hpp"

#include "alref/core/error.hpp"
#include "alref/io/files.hpp"
#include "alref/io/hash.hpp"

namespace alref::prompting {

ReplyCache::ReplyCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
}

std::string ReplyCache::key(const std::string& template_id, const std::string& prompt,
                            const std::vector<std::string>& image_hashes) {
  std::string material = template_id + '\n' + io::sha256_hex(prompt);
  for (const auto& h : image_hashes) material += '\n' + h;
  return io::sha256_hex(material);
}

std::optional<std::string> ReplyCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (dir_) {
    const auto path = *dir_ / (key + ".json");
    if (std::filesystem::exists(path)) {
      auto j = nlohmann::json::parse(io::read_text(path), nullptr, false);
      if (!j.is_discarded() && j.contains("reply") && j["reply"].is_string()) return j["reply"].get<std::string>();
    }
  }
  return std::nullopt;
}

void ReplyCache::store(const std::string& key, const std::string& reply) {
  std::lock_guard lock(mutex_);
  memory_[key] = reply;
  if (dir_) io::write_text(*dir_ / (key + ".json"), nlohmann::json{{"reply", reply}}.dump());
}

LlmChannel::LlmChannel(backends::ChatVisionBackend& backend, const PromptLibrary& prompts, AuditLog* audit,
                       ReplyCache* cache, int max_attempts, ImageDump dump)
    : backend_(backend),
      prompts_(prompts),
      audit_(audit),
      cache_(cache),
      max_attempts_(max_attempts),
      dump_(std::move(dump)) {
  require(max_attempts_ >= 1, "LLM attempts must be >= 1");
}

void LlmChannel::exchange(const LlmRequest& request,
                          const std::function<bool(const std::string&, nlohmann::json&)>& accept, int& attempts) {
  const auto& tmpl = prompts_.get(request.template_name);
  const std::string text = prompts_.render(request.template_name, request.vars);
  std::vector<std::string> hashes;
  for (const Raster* image : request.images) {
    hashes.push_back(io::raster_hash(*image));
    if (dump_) dump_(hashes.back(), *image);
  }
  const std::string cache_key = ReplyCache::key(tmpl.id(), text, hashes);

  for (attempts = 1; attempts <= max_attempts_; ++attempts) {
    std::optional<std::string> reply;
    bool cached = false;
    if (cache_ && attempts == 1) {
      reply = cache_->lookup(cache_key);
      cached = reply.has_value();
    }
    std::string error;
    if (!reply) {
      try {
        reply = backend_.chat(std::span<const Raster* const>(request.images), text);
      } catch (const Error& e) {
        // A timed-out attempt counts as a failed attempt; other failures abort.
        if (e.code() != ErrorCode::timeout) throw;
        reply = std::string();
        error = e.what();
      }
    }

    nlohmann::json parsed;
    const bool ok = error.empty() && accept(*reply, parsed);
    if (audit_) {
      audit_->record({{"event", "llm_call"},
                      {"stage", request.stage},
                      {"template", tmpl.name},
                      {"template_version", tmpl.version},
                      {"vars", request.vars},
                      {"prompt", text},
                      {"prompt_sha256", io::sha256_hex(text)},
                      {"images", hashes},
                      {"attempt", attempts},
                      {"cached", cached},
                      {"reply", *reply},
                      {"parsed", ok ? parsed : nlohmann::json(nullptr)},
                      {"ok", ok},
                      {"error", error.empty() ? nlohmann::json(nullptr) : nlohmann::json(error)}});
    }
    if (ok) {
      if (cache_ && !cached) cache_->store(cache_key, *reply);
      return;
    }
  }
  attempts = max_attempts_;
}

}  // namespace alref::prompting
