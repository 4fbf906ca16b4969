#include "alref/prompting/audit.hpp"

#include "alref/core/error.hpp"

namespace alref::prompting {

AuditLog::AuditLog(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  file_.emplace(path, std::ios::trunc);
  if (!*file_) fail(ErrorCode::io, "cannot open audit log " + path.string());
}

void AuditLog::record(nlohmann::json event) {
  std::lock_guard lock(mutex_);
  event["seq"] = seq_++;
  if (file_) {
    *file_ << event.dump() << '\n';
    file_->flush();
  }
  events_.push_back(std::move(event));
}

std::vector<nlohmann::json> AuditLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::vector<nlohmann::json> AuditLog::events_of(const std::string& kind) const {
  std::lock_guard lock(mutex_);
  std::vector<nlohmann::json> out;
  for (const auto& e : events_) {
    if (e.value("event", "") == kind) out.push_back(e);
  }
  return out;
}

std::vector<nlohmann::json> read_audit_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open audit log " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::io, path.string() + ":" + std::to_string(line_no) + ": malformed JSON");
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace alref::prompting
