#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alref/backends/interfaces.hpp"

namespace alref::backends {

// One canned response. `match` may hold "ordinal" (1-based call number for
// this operation), "contains", "equals" and "fingerprint"; every given key
// must hold. An entry carrying "error" raises that error code instead.
struct ScriptEntry {
  nlohmann::json match = nlohmann::json::object();
  nlohmann::json response;
  int times = -1;  // uses left; -1 = unlimited
};

// Scenario file:
//   {"strict": true,
//    "chat": [...], "ground": [...], "audio_tag": [...], "embed_audio": [...],
//    "embed_text": [...], "sed": [...], "segment": [...],
//    "samples": {"<video>/<expression>": {<same keys, replacing the defaults>}}}
class ScriptedScenario {
 public:
  static ScriptedScenario parse(const nlohmann::json& j);
  static ScriptedScenario load(const std::filesystem::path& path);

  /// The scenario as seen by one sample (per-sample lists replace defaults).
  ScriptedScenario for_sample(const std::string& key) const;

  bool strict() const { return strict_; }
  const std::vector<ScriptEntry>& entries(const std::string& op) const;

 private:
  bool strict_ = true;
  std::map<std::string, std::vector<ScriptEntry>> ops_;
  std::map<std::string, nlohmann::json> samples_;
};

// Answers requests for one operation from a scenario in order. Stateful:
// ordinals and `times` counters advance with each call.
class ScriptedResponder {
 public:
  ScriptedResponder(std::string op, std::vector<ScriptEntry> entries, bool strict);

  /// The matching response (null when nothing matches in a lenient scenario).
  nlohmann::json respond(const std::string& text, const std::string& fingerprint);
  int calls() const;

 private:
  std::string op_;
  std::vector<ScriptEntry> entries_;
  bool strict_;
  mutable std::mutex mutex_;
  int calls_ = 0;
};

std::string chat_fingerprint(std::span<const Raster* const> images, const std::string& text);
std::string ground_fingerprint(const Raster& image, const std::string& phrase);
std::string audio_fingerprint(const AudioClip& audio);

/// Fills each frame with the box of the nearest prompted frame (earlier frame on ties).
class BoxFillSegmenter : public VideoSegmenterBackend {
 public:
  SessionId open(const VideoClip& clip) override;
  void add_prompt(const SessionId& session, std::int64_t frame_index, const BoundingBox& box) override;
  std::vector<BinaryMask> propagate(const SessionId& session, std::int64_t start_frame) override;
  void close(const SessionId& session) override;

 private:
  struct Session {
    std::int64_t frames = 0;
    int height = 0;
    int width = 0;
    std::vector<std::pair<std::int64_t, BoundingBox>> prompts;
  };
  std::mutex mutex_;
  std::map<SessionId, Session> sessions_;
  int next_ = 1;
};

/// All six backends answering from one scenario; the segmenter is box-fill
/// unless "segment" entries inject errors.
BackendSet scripted_backends(const ScriptedScenario& scenario);

}  // namespace alref::backends
