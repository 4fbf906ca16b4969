#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace alref::prompting {

// Append-only JSON-lines log of every prompt, reply and fallback decision.
// Events carry a sequence number and no wall-clock data, so identical runs
// produce identical logs.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(const std::filesystem::path& path);

  void record(nlohmann::json event);
  std::vector<nlohmann::json> events() const;

  /// Events whose "event" field equals `kind`.
  std::vector<nlohmann::json> events_of(const std::string& kind) const;

 private:
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> events_;
  std::optional<std::ofstream> file_;
  long long seq_ = 0;
};

std::vector<nlohmann::json> read_audit_log(const std::filesystem::path& path);

}  // namespace alref::prompting
