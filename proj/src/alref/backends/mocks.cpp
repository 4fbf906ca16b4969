#include "alref/backends/mocks.hpp"

#include <cstring>
#include <set>

#include "alref/backends/protocol.hpp"
#include "alref/core/error.hpp"
#include "alref/io/files.hpp"
#include "alref/io/hash.hpp"

namespace alref::backends {

using nlohmann::json;

namespace {

const std::set<std::string> kOps = {"chat", "ground", "audio_tag", "embed_audio", "embed_text", "sed", "segment"};

std::vector<ScriptEntry> parse_entries(const std::string& op, const json& list) {
  if (!list.is_array()) fail(ErrorCode::scenario, "scenario '" + op + "' must be a list");
  std::vector<ScriptEntry> out;
  for (const auto& item : list) {
    if (!item.is_object()) fail(ErrorCode::scenario, "scenario '" + op + "' entries must be objects");
    ScriptEntry e;
    e.response = json::object();
    for (auto it = item.begin(); it != item.end(); ++it) {
      if (it.key() == "match") {
        if (!it->is_object()) fail(ErrorCode::scenario, "'match' must be an object");
        for (auto m = it->begin(); m != it->end(); ++m) {
          static const std::set<std::string> keys = {"ordinal", "contains", "equals", "fingerprint"};
          if (!keys.count(m.key())) fail(ErrorCode::scenario, "unknown match key '" + m.key() + "'");
        }
        e.match = *it;
      } else if (it.key() == "times") {
        e.times = it->get<int>();
      } else {
        e.response[it.key()] = *it;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

ErrorCode scripted_error_code(const std::string& name) {
  if (name == "timeout") return ErrorCode::timeout;
  if (name == "protocol") return ErrorCode::protocol;
  if (name == "backend") return ErrorCode::backend;
  fail(ErrorCode::scenario, "unknown scripted error '" + name + "'");
}

bool matches(const json& match, int ordinal, const std::string& text, const std::string& fingerprint) {
  if (match.contains("ordinal") && match["ordinal"].get<int>() != ordinal) return false;
  if (match.contains("contains") && text.find(match["contains"].get<std::string>()) == std::string::npos) return false;
  if (match.contains("equals") && text != match["equals"].get<std::string>()) return false;
  if (match.contains("fingerprint") && fingerprint != match["fingerprint"].get<std::string>()) return false;
  return true;
}

}  // namespace

ScriptedScenario ScriptedScenario::parse(const json& j) {
  if (!j.is_object()) fail(ErrorCode::scenario, "scenario must be a JSON object");
  ScriptedScenario s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "strict") {
      s.strict_ = it->get<bool>();
    } else if (it.key() == "samples") {
      if (!it->is_object()) fail(ErrorCode::scenario, "'samples' must be an object");
      for (auto sit = it->begin(); sit != it->end(); ++sit) {
        parse(*sit);  // validate early
        s.samples_[sit.key()] = *sit;
      }
    } else if (it.key() == "description") {
    } else if (kOps.count(it.key())) {
      s.ops_[it.key()] = parse_entries(it.key(), *it);
    } else {
      fail(ErrorCode::scenario, "unknown scenario key '" + it.key() + "'");
    }
  }
  return s;
}

ScriptedScenario ScriptedScenario::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::scenario, "cannot parse scenario " + path.string() + ": " + e.what());
  }
  return parse(j);
}

ScriptedScenario ScriptedScenario::for_sample(const std::string& key) const {
  ScriptedScenario s = *this;
  s.samples_.clear();
  auto it = samples_.find(key);
  if (it == samples_.end()) return s;
  const auto over = parse(it->second);
  for (const auto& [op, list] : over.ops_) s.ops_[op] = list;
  if (it->second.contains("strict")) s.strict_ = over.strict_;
  return s;
}

const std::vector<ScriptEntry>& ScriptedScenario::entries(const std::string& op) const {
  static const std::vector<ScriptEntry> none;
  auto it = ops_.find(op);
  return it == ops_.end() ? none : it->second;
}

ScriptedResponder::ScriptedResponder(std::string op, std::vector<ScriptEntry> entries, bool strict)
    : op_(std::move(op)), entries_(std::move(entries)), strict_(strict) {}

json ScriptedResponder::respond(const std::string& text, const std::string& fingerprint) {
  std::lock_guard lock(mutex_);
  const int ordinal = ++calls_;
  for (auto& e : entries_) {
    if (e.times == 0 || !matches(e.match, ordinal, text, fingerprint)) continue;
    if (e.times > 0) --e.times;
    if (e.response.contains("error")) {
      const std::string message = e.response.value("message", "scripted " + e.response["error"].get<std::string>());
      fail(scripted_error_code(e.response["error"].get<std::string>()), op_ + ": " + message);
    }
    return e.response;
  }
  if (strict_) {
    std::string shown = text.substr(0, 80);
    fail(ErrorCode::scenario, "strict scenario has no '" + op_ + "' entry for call " + std::to_string(ordinal) +
                                  " (fingerprint " + fingerprint + ", text \"" + shown + "\")");
  }
  return nullptr;
}

int ScriptedResponder::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::string chat_fingerprint(std::span<const Raster* const> images, const std::string& text) {
  std::string material = text;
  for (const Raster* r : images) material += "\n" + io::raster_hash(*r);
  return io::sha256_hex(material);
}

std::string ground_fingerprint(const Raster& image, const std::string& phrase) {
  return io::sha256_hex(phrase + "\n" + io::raster_hash(image));
}

std::string audio_fingerprint(const AudioClip& audio) {
  std::vector<std::uint8_t> bytes(audio.samples().size() * sizeof(float) + sizeof(int));
  const int rate = audio.sample_rate();
  std::memcpy(bytes.data(), &rate, sizeof(int));
  if (!audio.samples().empty())
    std::memcpy(bytes.data() + sizeof(int), audio.samples().data(), audio.samples().size() * sizeof(float));
  return io::sha256_hex(bytes);
}

SessionId BoxFillSegmenter::open(const VideoClip& clip) {
  std::lock_guard lock(mutex_);
  SessionId id = "boxfill-" + std::to_string(next_++);
  sessions_[id] = Session{clip.size(), clip.height(), clip.width(), {}};
  return id;
}

void BoxFillSegmenter::add_prompt(const SessionId& session, std::int64_t frame_index, const BoundingBox& box) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session);
  if (it == sessions_.end()) fail(ErrorCode::backend, "unknown session " + session);
  if (frame_index < 0 || frame_index >= it->second.frames) fail(ErrorCode::backend, "prompt frame out of range");
  it->second.prompts.emplace_back(frame_index, box);
}

std::vector<BinaryMask> BoxFillSegmenter::propagate(const SessionId& session, std::int64_t) {
  Session s;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session);
    if (it == sessions_.end()) fail(ErrorCode::backend, "unknown session " + session);
    s = it->second;
  }
  std::vector<BinaryMask> out;
  out.reserve(static_cast<std::size_t>(s.frames));
  for (std::int64_t f = 0; f < s.frames; ++f) {
    const BoundingBox* best = nullptr;
    std::int64_t best_frame = 0;
    for (const auto& [pf, box] : s.prompts) {
      const auto d = std::abs(pf - f);
      const auto bd = std::abs(best_frame - f);
      if (!best || d < bd || (d == bd && pf < best_frame)) {
        best = &box;
        best_frame = pf;
      }
    }
    out.push_back(best ? box_mask(*best, s.height, s.width) : BinaryMask(s.height, s.width));
  }
  return out;
}

void BoxFillSegmenter::close(const SessionId& session) {
  std::lock_guard lock(mutex_);
  sessions_.erase(session);
}

namespace {

class ScriptedChat final : public ChatVisionBackend {
 public:
  explicit ScriptedChat(std::shared_ptr<ScriptedResponder> r) : r_(std::move(r)) {}
  std::string chat(std::span<const Raster* const> images, const std::string& text) override {
    auto res = r_->respond(text, chat_fingerprint(images, text));
    if (res.is_null()) return {};
    if (!res.contains("reply") || !res["reply"].is_string())
      fail(ErrorCode::scenario, "chat entries need a string 'reply'");
    return res["reply"].get<std::string>();
  }

 private:
  std::shared_ptr<ScriptedResponder> r_;
};

class ScriptedGrounding final : public GroundingBackend {
 public:
  explicit ScriptedGrounding(std::shared_ptr<ScriptedResponder> r) : r_(std::move(r)) {}
  std::vector<BoundingBox> ground(const Raster& image, const std::string& phrase, double, double) override {
    auto res = r_->respond(phrase, ground_fingerprint(image, phrase));
    if (res.is_null()) return {};
    return protocol::parse_ground_response(res);
  }

 private:
  std::shared_ptr<ScriptedResponder> r_;
};

class ScriptedTagger final : public AudioTaggerBackend {
 public:
  explicit ScriptedTagger(std::shared_ptr<ScriptedResponder> r) : r_(std::move(r)) {}
  std::vector<ScoredLabel> tag_audio(const AudioClip& audio) override {
    auto res = r_->respond("", audio_fingerprint(audio));
    if (res.is_null()) return {};
    return protocol::parse_tag_response(res);
  }

 private:
  std::shared_ptr<ScriptedResponder> r_;
};

class ScriptedEmbedder final : public CrossModalEmbedderBackend {
 public:
  ScriptedEmbedder(std::shared_ptr<ScriptedResponder> audio, std::shared_ptr<ScriptedResponder> text)
      : audio_(std::move(audio)), text_(std::move(text)) {}
  EmbeddingVector embed_audio(const AudioClip& segment) override {
    return unpack(audio_->respond("", audio_fingerprint(segment)), "embed_audio");
  }
  EmbeddingVector embed_text(const std::string& text) override {
    return unpack(text_->respond(text, io::sha256_hex(text)), "embed_text");
  }

 private:
  static EmbeddingVector unpack(const json& res, const char* op) {
    if (res.is_null()) fail(ErrorCode::backend, std::string(op) + ": no scripted embedding");
    return protocol::parse_embedding_response(res);
  }
  std::shared_ptr<ScriptedResponder> audio_;
  std::shared_ptr<ScriptedResponder> text_;
};

class ScriptedSed final : public SoundEventBackend {
 public:
  explicit ScriptedSed(std::shared_ptr<ScriptedResponder> r) : r_(std::move(r)) {}
  std::vector<double> sed_boundaries(const AudioClip& audio) override {
    auto res = r_->respond("", audio_fingerprint(audio));
    if (res.is_null()) return {};
    return protocol::parse_sed_response(res);
  }

 private:
  std::shared_ptr<ScriptedResponder> r_;
};

// Box-fill propagation, with scripted errors or empty results keyed on the
// propagate-call ordinal.
class ScriptedSegmenter final : public BoxFillSegmenter {
 public:
  explicit ScriptedSegmenter(std::shared_ptr<ScriptedResponder> r) : r_(std::move(r)) {}
  std::vector<BinaryMask> propagate(const SessionId& session, std::int64_t start_frame) override {
    auto res = r_->respond(std::to_string(start_frame), session);
    auto masks = BoxFillSegmenter::propagate(session, start_frame);
    if (res.is_object() && res.value("mode", "boxfill") == "empty") {
      for (auto& m : masks) m.clear();
    }
    return masks;
  }

 private:
  std::shared_ptr<ScriptedResponder> r_;
};

}  // namespace

BackendSet scripted_backends(const ScriptedScenario& scenario) {
  auto responder = [&](const char* op, bool strict) {
    return std::make_shared<ScriptedResponder>(op, scenario.entries(op), strict);
  };
  BackendSet set;
  set.chat = std::make_shared<ScriptedChat>(responder("chat", scenario.strict()));
  set.grounding = std::make_shared<ScriptedGrounding>(responder("ground", scenario.strict()));
  // Segment entries are optional error injections; absence means plain box fill.
  set.segmenter = std::make_shared<ScriptedSegmenter>(responder("segment", false));
  set.tagger = std::make_shared<ScriptedTagger>(responder("audio_tag", scenario.strict()));
  set.embedder = std::make_shared<ScriptedEmbedder>(responder("embed_audio", scenario.strict()),
                                                    responder("embed_text", scenario.strict()));
  set.sed = std::make_shared<ScriptedSed>(responder("sed", scenario.strict()));
  return set;
}

}  // namespace alref::backends
