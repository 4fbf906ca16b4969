#include "alref/backends/oracle.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <regex>

#include <nlohmann/json.hpp>

#include "alref/core/error.hpp"
#include "alref/io/hash.hpp"

namespace alref::backends {

namespace {

std::string target_of(const std::string& prompt) {
  static const std::regex re("Target description: \"([^\"]*)\"");
  std::smatch m;
  if (std::regex_search(prompt, m, re)) return m[1].str();
  return prompt;
}

const OracleObject* find_object(const OracleTruth& truth, const std::string& text) {
  const std::string target = target_of(text);
  for (const auto& o : truth.objects) {
    if (o.name == target || "the " + o.name + " that is making sound" == target) return &o;
  }
  return nullptr;
}

std::vector<std::string> sounding_names(const OracleTruth& truth) {
  std::vector<std::string> names;
  for (const auto& o : truth.objects) {
    if (std::any_of(o.masks.begin(), o.masks.end(), [](const BinaryMask& m) { return m.any(); }))
      names.push_back(o.name);
  }
  return names;
}

class OracleChat final : public ChatVisionBackend {
 public:
  explicit OracleChat(std::shared_ptr<const OracleTruth> t) : t_(std::move(t)) {}
  std::string chat(std::span<const Raster* const>, const std::string& text) override {
    if (text.find("Target description:") == std::string::npos) {
      nlohmann::json names = sounding_names(*t_);
      return "Oracle categories.\n```json\n" + names.dump() + "\n```";
    }
    if (text.find("{\"frame\"") != std::string::npos) return frame_reply(text);
    return "Oracle box.\n```json\n{\"box\": 1}\n```";
  }

 private:
  std::string frame_reply(const std::string& text) const {
    static const std::regex map_re("[Ff]rame ID (\\d+) is video frame (\\d+)");
    const OracleObject* obj = find_object(*t_, text);
    int best_id = -1;
    std::size_t best_area = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), map_re); it != std::sregex_iterator(); ++it) {
      const int id = std::stoi((*it)[1].str());
      const auto frame = static_cast<std::size_t>(std::stoll((*it)[2].str()));
      const std::size_t area = obj && frame < obj->masks.size() ? obj->masks[frame].count() : 0;
      if (best_id < 0 || area > best_area) {
        best_id = id;
        best_area = area;
      }
    }
    if (best_id < 0) best_id = 1;
    return "Oracle frame.\n```json\n{\"frame\": " + std::to_string(best_id) + ", \"event\": \"oracle\"}\n```";
  }

  std::shared_ptr<const OracleTruth> t_;
};

class OracleGrounding final : public GroundingBackend {
 public:
  explicit OracleGrounding(std::shared_ptr<const OracleTruth> t) : t_(std::move(t)) {
    for (const auto& f : t_->clip->frames()) index_.emplace(io::raster_hash(f.pixels), f.index);
  }
  std::vector<BoundingBox> ground(const Raster& image, const std::string& phrase, double, double) override {
    auto it = index_.find(io::raster_hash(image));
    if (it == index_.end()) return {};
    const OracleObject* obj = find_object(*t_, phrase);
    if (!obj) return {};
    auto box = mask_bounding_box(obj->masks[static_cast<std::size_t>(it->second)]);
    if (!box) return {};
    box->score = 0.9;
    box->label = phrase;
    return {*box};
  }

 private:
  std::shared_ptr<const OracleTruth> t_;
  std::multimap<std::string, std::int64_t> index_;
};

class OracleSegmenter final : public VideoSegmenterBackend {
 public:
  explicit OracleSegmenter(std::shared_ptr<const OracleTruth> t) : t_(std::move(t)) {}
  SessionId open(const VideoClip&) override {
    std::lock_guard lock(mutex_);
    SessionId id = "oracle-" + std::to_string(next_++);
    prompts_[id];
    return id;
  }
  void add_prompt(const SessionId& session, std::int64_t frame_index, const BoundingBox& box) override {
    std::lock_guard lock(mutex_);
    prompts_.at(session).emplace_back(frame_index, box);
  }
  std::vector<BinaryMask> propagate(const SessionId& session, std::int64_t) override {
    std::vector<std::pair<std::int64_t, BoundingBox>> prompts;
    {
      std::lock_guard lock(mutex_);
      prompts = prompts_.at(session);
    }
    const OracleObject* best = nullptr;
    double best_score = 0.0;
    for (const auto& o : t_->objects) {
      double score = 0.0;
      for (const auto& [f, box] : prompts) {
        if (auto truth = mask_bounding_box(o.masks[static_cast<std::size_t>(f)])) score += box_iou(*truth, box);
      }
      if (score > best_score) {
        best = &o;
        best_score = score;
      }
    }
    if (best) return best->masks;
    return std::vector<BinaryMask>(static_cast<std::size_t>(t_->clip->size()),
                                   BinaryMask(t_->clip->height(), t_->clip->width()));
  }
  void close(const SessionId& session) override {
    std::lock_guard lock(mutex_);
    prompts_.erase(session);
  }

 private:
  std::shared_ptr<const OracleTruth> t_;
  std::mutex mutex_;
  std::map<SessionId, std::vector<std::pair<std::int64_t, BoundingBox>>> prompts_;
  int next_ = 1;
};

// Bit i set when object i is visible on frame f.
std::uint64_t visible_set(const OracleTruth& t, std::int64_t f) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < t.objects.size() && i < 64; ++i) {
    if (t.objects[i].masks[static_cast<std::size_t>(f)].any()) bits |= std::uint64_t{1} << i;
  }
  return bits;
}

class OracleTagger final : public AudioTaggerBackend {
 public:
  explicit OracleTagger(std::shared_ptr<const OracleTruth> t) : t_(std::move(t)) {}
  std::vector<ScoredLabel> tag_audio(const AudioClip&) override {
    std::vector<ScoredLabel> out;
    double score = 0.9;
    for (const auto& name : sounding_names(*t_)) {
      out.push_back({name, score});
      score = std::max(0.05, score - 0.1);
    }
    return out;
  }

 private:
  std::shared_ptr<const OracleTruth> t_;
};

class OracleSed final : public SoundEventBackend {
 public:
  explicit OracleSed(std::shared_ptr<const OracleTruth> t) : t_(std::move(t)) {}
  std::vector<double> sed_boundaries(const AudioClip&) override {
    std::vector<double> out;
    const Rational fps = t_->clip->fps();
    for (std::int64_t f = 1; f < t_->clip->size(); ++f) {
      if (visible_set(*t_, f) != visible_set(*t_, f - 1))
        out.push_back(static_cast<double>(f * fps.den) / static_cast<double>(fps.num));
    }
    return out;
  }

 private:
  std::shared_ptr<const OracleTruth> t_;
};

class OracleEmbedder final : public CrossModalEmbedderBackend {
 public:
  explicit OracleEmbedder(std::shared_ptr<const OracleTruth> t) : t_(std::move(t)) {}
  EmbeddingVector embed_text(const std::string& text) override {
    EmbeddingVector v;
    v.values.assign(t_->objects.size(), 0.0);
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto next = text.find(" and ", pos);
      const std::string part = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      for (std::size_t i = 0; i < t_->objects.size(); ++i) {
        if (t_->objects[i].name == part) v.values[i] = 1.0;
      }
      if (next == std::string::npos) break;
      pos = next + 5;
    }
    return v;
  }
  // Locates the segment inside the full soundtrack and reports the objects
  // visible on the frames whose midpoints it covers.
  EmbeddingVector embed_audio(const AudioClip& segment) override {
    if (!t_->audio) fail(ErrorCode::backend, "oracle embedder has no soundtrack");
    const auto& full = t_->audio->samples();
    const auto& part = segment.samples();
    auto it = std::search(full.begin(), full.end(), part.begin(), part.end());
    if (it == full.end() || part.empty()) fail(ErrorCode::backend, "oracle embedder cannot place the audio segment");
    const double rate = t_->audio->sample_rate();
    const double start = static_cast<double>(it - full.begin()) / rate;
    const double end = start + static_cast<double>(part.size()) / rate;
    const Rational fps = t_->clip->fps();
    std::uint64_t bits = 0;
    for (std::int64_t f = 0; f < t_->clip->size(); ++f) {
      const double mid = static_cast<double>(2 * f + 1) * static_cast<double>(fps.den) / (2.0 * fps.num);
      if (mid >= start && mid < end) bits |= visible_set(*t_, f);
    }
    EmbeddingVector v;
    for (std::size_t i = 0; i < t_->objects.size(); ++i) v.values.push_back((bits >> i) & 1 ? 1.0 : 0.0);
    return v;
  }

 private:
  std::shared_ptr<const OracleTruth> t_;
};

}  // namespace

BackendSet oracle_backends(std::shared_ptr<const OracleTruth> truth) {
  require(truth && truth->clip, "oracle_backends: missing ground truth");
  for (const auto& o : truth->objects) {
    require(static_cast<std::int64_t>(o.masks.size()) == truth->clip->size(),
            "oracle_backends: ground truth length differs from the video");
  }
  BackendSet set;
  set.chat = std::make_shared<OracleChat>(truth);
  set.grounding = std::make_shared<OracleGrounding>(truth);
  set.segmenter = std::make_shared<OracleSegmenter>(truth);
  set.tagger = std::make_shared<OracleTagger>(truth);
  set.embedder = std::make_shared<OracleEmbedder>(truth);
  set.sed = std::make_shared<OracleSed>(truth);
  return set;
}

}  // namespace alref::backends
