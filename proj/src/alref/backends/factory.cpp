#include "alref/backends/factory.hpp"

#include <cstdlib>

#include "alref/core/error.hpp"
#include "alref/io/files.hpp"

namespace alref::backends {

using nlohmann::json;

namespace {

constexpr BackendKind kAllKinds[] = {BackendKind::chat_vision,  BackendKind::grounding,
                                     BackendKind::video_segmenter, BackendKind::audio_tagger,
                                     BackendKind::cross_modal_embedder, BackendKind::sound_event};

bool is_http(const std::string& e) { return e.rfind("http://", 0) == 0 || e.rfind("https://", 0) == 0; }
bool is_mock(const std::string& e) { return e.rfind("mock:", 0) == 0; }

BackendDescriptor read_descriptor(BackendKind kind, const json& j, const BackendDescriptor& base) {
  BackendDescriptor d = base;
  d.kind = kind;
  const std::string where = to_string(kind);
  if (j.is_string()) {
    d.endpoint = j.get<std::string>();
    return d;
  }
  if (!j.is_object()) fail(ErrorCode::config, "backend '" + where + "' must be a string or an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    try {
      if (k == "endpoint") d.endpoint = it->get<std::string>();
      else if (k == "timeout_seconds") d.timeout_seconds = it->get<double>();
      else if (k == "retries") d.retries = it->get<int>();
      else if (k == "path") d.path = it->get<std::string>();
      else if (k == "model") d.model = it->get<std::string>();
      else if (k == "api_key_env") d.api_key_env = it->get<std::string>();
      else fail(ErrorCode::config, "unknown key '" + k + "' in backend '" + where + "'");
    } catch (const json::exception&) {
      fail(ErrorCode::config, "backend '" + where + "." + k + "' has the wrong type");
    }
  }
  return d;
}

}  // namespace

std::optional<BackendKind> parse_backend_kind(const std::string& s) {
  for (auto k : kAllKinds) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

BackendConfig parse_backend_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) fail(ErrorCode::config, "backend config must be a JSON object");
  BackendDescriptor defaults;
  const bool has_default = j.contains("default");
  if (has_default) defaults = read_descriptor(BackendKind::chat_vision, j.at("default"), defaults);

  BackendConfig config;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "default") continue;
    if (!parse_backend_kind(it.key())) fail(ErrorCode::config, "unknown backend kind '" + it.key() + "'");
  }
  for (auto kind : kAllKinds) {
    const std::string name = to_string(kind);
    BackendDescriptor d;
    if (j.contains(name)) d = read_descriptor(kind, j.at(name), defaults);
    else if (has_default) d = read_descriptor(kind, j.at("default"), defaults);
    else continue;

    if (d.endpoint.empty()) continue;
    if (!is_http(d.endpoint) && !is_mock(d.endpoint)) {
      fail(ErrorCode::config, "backend '" + name + "' endpoint '" + d.endpoint + "' must be http(s):// or mock:");
    }
    if (is_mock(d.endpoint)) {
      const std::string scenario = d.endpoint.substr(5);
      if (scenario.empty()) fail(ErrorCode::config, "backend '" + name + "' names an empty mock scenario");
      if (scenario == "boxfill" && kind != BackendKind::video_segmenter)
        fail(ErrorCode::config, "mock:boxfill is only a video_segmenter scenario");
      if (scenario != "oracle" && scenario != "boxfill") {
        std::filesystem::path p(scenario);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        d.endpoint = "mock:" + p.string();
      }
    }
    config.kinds[kind] = d;
  }
  return config;
}

BackendConfig load_backend_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::config, "cannot parse backend config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  return parse_backend_config(j, path.parent_path());
}

std::vector<BackendKind> required_kinds(bool avs) {
  if (avs) return {std::begin(kAllKinds), std::end(kAllKinds)};
  return {BackendKind::chat_vision, BackendKind::grounding, BackendKind::video_segmenter};
}

void require_endpoints(const BackendConfig& config, const std::vector<BackendKind>& kinds) {
  for (auto k : kinds) {
    if (!config.kinds.count(k)) fail(ErrorCode::config, std::string("no endpoint configured for backend '") +
                                                            to_string(k) + "'");
  }
}

BackendProvider::BackendProvider(BackendConfig config) : config_(std::move(config)) {
  std::map<std::string, ScriptedScenario> loaded;
  for (const auto& [kind, d] : config_.kinds) {
    if (is_http(d.endpoint)) {
      HttpOptions options{d.endpoint, d.timeout_seconds, d.retries, {}};
      if (kind == BackendKind::chat_vision && !d.api_key_env.empty()) {
        const char* key = std::getenv(d.api_key_env.c_str());
        if (!key || !*key) fail(ErrorCode::config, "environment variable " + d.api_key_env + " is not set");
        options.headers["Authorization"] = std::string("Bearer ") + key;
      }
      transports_[kind] = std::make_shared<HttpTransport>(std::move(options));
      continue;
    }
    const std::string scenario = d.endpoint.substr(5);
    if (scenario == "oracle" || scenario == "boxfill") continue;
    auto it = loaded.find(scenario);
    if (it == loaded.end()) {
      try {
        it = loaded.emplace(scenario, ScriptedScenario::load(scenario)).first;
      } catch (const Error& e) {
        fail(ErrorCode::config, std::string("backend '") + to_string(kind) + "': " + e.what());
      }
    }
    scenarios_[kind] = it->second;
  }
}

bool BackendProvider::needs_truth() const {
  for (const auto& [kind, d] : config_.kinds) {
    if (d.endpoint == "mock:oracle") return true;
  }
  return false;
}

BackendSet BackendProvider::for_sample(const std::string& sample_key, std::shared_ptr<const OracleTruth> truth) const {
  BackendSet out;
  std::optional<BackendSet> oracle;
  std::map<std::string, BackendSet> scripted;

  for (const auto& [kind, d] : config_.kinds) {
    BackendSet source;
    if (auto t = transports_.find(kind); t != transports_.end()) {
      switch (kind) {
        case BackendKind::chat_vision: out.chat = make_http_chat(t->second, d.path, d.model); break;
        case BackendKind::grounding: out.grounding = make_http_grounding(t->second); break;
        case BackendKind::video_segmenter: out.segmenter = make_http_segmenter(t->second); break;
        case BackendKind::audio_tagger: out.tagger = make_http_tagger(t->second); break;
        case BackendKind::cross_modal_embedder: out.embedder = make_http_embedder(t->second); break;
        case BackendKind::sound_event: out.sed = make_http_sed(t->second); break;
      }
      continue;
    }
    if (d.endpoint == "mock:boxfill") {
      out.segmenter = std::make_shared<BoxFillSegmenter>();
      continue;
    }
    if (d.endpoint == "mock:oracle") {
      if (!truth) fail(ErrorCode::config, std::string("backend '") + to_string(kind) +
                                              "' is mock:oracle but no ground truth is available for " + sample_key);
      if (!oracle) oracle = oracle_backends(truth);
      source = *oracle;
    } else {
      auto it = scripted.find(d.endpoint);
      if (it == scripted.end()) {
        it = scripted.emplace(d.endpoint, scripted_backends(scenarios_.at(kind).for_sample(sample_key))).first;
      }
      source = it->second;
    }
    switch (kind) {
      case BackendKind::chat_vision: out.chat = source.chat; break;
      case BackendKind::grounding: out.grounding = source.grounding; break;
      case BackendKind::video_segmenter: out.segmenter = source.segmenter; break;
      case BackendKind::audio_tagger: out.tagger = source.tagger; break;
      case BackendKind::cross_modal_embedder: out.embedder = source.embedder; break;
      case BackendKind::sound_event: out.sed = source.sed; break;
    }
  }
  return out;
}

}  // namespace alref::backends
