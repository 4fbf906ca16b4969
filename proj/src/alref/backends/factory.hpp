#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alref/backends/http.hpp"
#include "alref/backends/interfaces.hpp"
#include "alref/backends/mocks.hpp"
#include "alref/backends/oracle.hpp"

namespace alref::backends {

// endpoint is "http(s)://..." or "mock:<scenario>", where the scenario is
// "oracle", "boxfill" (segmenter only) or a path to a scripted scenario file.
struct BackendDescriptor {
  BackendKind kind = BackendKind::chat_vision;
  std::string endpoint;
  double timeout_seconds = 60.0;
  int retries = 2;
  std::string path = "/v1/chat";  // chat only
  std::string model = "gpt-4";    // chat only
  std::string api_key_env;        // chat only; sent as a bearer token
};

struct BackendConfig {
  std::map<BackendKind, BackendDescriptor> kinds;
};

std::optional<BackendKind> parse_backend_kind(const std::string& s);

// {"default": ..., "chat_vision": ..., "grounding": ..., ...}. Each value is an
// endpoint string or an object with "endpoint", "timeout_seconds", "retries",
// "path", "model", "api_key_env". Scenario paths resolve against base_dir.
BackendConfig parse_backend_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
BackendConfig load_backend_config(const std::filesystem::path& path);

/// Kinds a task needs: three for RVOS, all six for AVS.
std::vector<BackendKind> required_kinds(bool avs);

/// Throws ErrorCode::config naming the first kind without an endpoint.
void require_endpoints(const BackendConfig& config, const std::vector<BackendKind>& kinds);

// Builds backends for each sample. HTTP transports are shared; mock backends
// are fresh per sample so scripted ordinals restart and runs stay
// independent of scheduling.
class BackendProvider {
 public:
  explicit BackendProvider(BackendConfig config);

  bool needs_truth() const;
  BackendSet for_sample(const std::string& sample_key, std::shared_ptr<const OracleTruth> truth = nullptr) const;

 private:
  BackendConfig config_;
  std::map<BackendKind, std::shared_ptr<HttpTransport>> transports_;
  std::map<BackendKind, ScriptedScenario> scenarios_;
};

}  // namespace alref::backends
