#include <cmath>
#include <optional>

#include "alref/backends/interfaces.hpp"
#include "alref/core/error.hpp"

namespace alref::backends {

const char* to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::chat_vision: return "chat_vision";
    case BackendKind::grounding: return "grounding";
    case BackendKind::video_segmenter: return "video_segmenter";
    case BackendKind::audio_tagger: return "audio_tagger";
    case BackendKind::cross_modal_embedder: return "cross_modal_embedder";
    case BackendKind::sound_event: return "sound_event";
  }
  return "unknown";
}

namespace {

[[noreturn]] void protocol_error(const std::string& what) { fail(ErrorCode::protocol, what); }

class GuardedChat final : public ChatVisionBackend {
 public:
  GuardedChat(std::shared_ptr<ChatVisionBackend> inner, std::shared_ptr<CallCounters> c)
      : inner_(std::move(inner)), counters_(std::move(c)) {}
  std::string chat(std::span<const Raster* const> images, const std::string& text) override {
    ++counters_->chat;
    return inner_->chat(images, text);
  }

 private:
  std::shared_ptr<ChatVisionBackend> inner_;
  std::shared_ptr<CallCounters> counters_;
};

class GuardedGrounding final : public GroundingBackend {
 public:
  GuardedGrounding(std::shared_ptr<GroundingBackend> inner, std::shared_ptr<CallCounters> c)
      : inner_(std::move(inner)), counters_(std::move(c)) {}
  std::vector<BoundingBox> ground(const Raster& image, const std::string& phrase, double text_threshold,
                                  double box_threshold) override {
    ++counters_->ground;
    auto boxes = inner_->ground(image, phrase, text_threshold, box_threshold);
    for (const auto& b : boxes) {
      if (!b.valid_for(image.width, image.height) || !std::isfinite(b.score)) {
        protocol_error("grounding backend returned an invalid box [" + std::to_string(b.x_min) + "," +
                       std::to_string(b.y_min) + "," + std::to_string(b.x_max) + "," + std::to_string(b.y_max) +
                       "] score " + std::to_string(b.score));
      }
    }
    return boxes;
  }

 private:
  std::shared_ptr<GroundingBackend> inner_;
  std::shared_ptr<CallCounters> counters_;
};

class GuardedSegmenter final : public VideoSegmenterBackend {
 public:
  GuardedSegmenter(std::shared_ptr<VideoSegmenterBackend> inner, std::shared_ptr<CallCounters> c)
      : inner_(std::move(inner)), counters_(std::move(c)) {}
  SessionId open(const VideoClip& clip) override {
    ++counters_->segment_open;
    auto id = inner_->open(clip);
    if (id.empty()) protocol_error("segmenter returned an empty session handle");
    frames_ = clip.size();
    height_ = clip.height();
    width_ = clip.width();
    return id;
  }
  void add_prompt(const SessionId& session, std::int64_t frame_index, const BoundingBox& box) override {
    ++counters_->segment_prompt;
    inner_->add_prompt(session, frame_index, box);
  }
  std::vector<BinaryMask> propagate(const SessionId& session, std::int64_t start_frame) override {
    ++counters_->segment_propagate;
    auto masks = inner_->propagate(session, start_frame);
    if (static_cast<std::int64_t>(masks.size()) != frames_) {
      protocol_error("segmenter returned " + std::to_string(masks.size()) + " masks for a " +
                     std::to_string(frames_) + "-frame session");
    }
    for (const auto& m : masks) {
      if (m.height != height_ || m.width != width_ ||
          m.bits.size() != static_cast<std::size_t>(height_) * width_) {
        protocol_error("segmenter returned a mask with mismatched dimensions");
      }
    }
    return masks;
  }
  void close(const SessionId& session) override { inner_->close(session); }

 private:
  std::shared_ptr<VideoSegmenterBackend> inner_;
  std::shared_ptr<CallCounters> counters_;
  std::int64_t frames_ = 0;
  int height_ = 0;
  int width_ = 0;
};

class GuardedTagger final : public AudioTaggerBackend {
 public:
  GuardedTagger(std::shared_ptr<AudioTaggerBackend> inner, std::shared_ptr<CallCounters> c)
      : inner_(std::move(inner)), counters_(std::move(c)) {}
  std::vector<ScoredLabel> tag_audio(const AudioClip& audio) override {
    ++counters_->audio_tag;
    auto labels = inner_->tag_audio(audio);
    for (const auto& l : labels) {
      if (l.label.empty() || !std::isfinite(l.score) || l.score < 0.0 || l.score > 1.0) {
        protocol_error("audio tagger returned an invalid label '" + l.label + "'");
      }
    }
    return labels;
  }

 private:
  std::shared_ptr<AudioTaggerBackend> inner_;
  std::shared_ptr<CallCounters> counters_;
};

class GuardedEmbedder final : public CrossModalEmbedderBackend {
 public:
  GuardedEmbedder(std::shared_ptr<CrossModalEmbedderBackend> inner, std::shared_ptr<CallCounters> c)
      : inner_(std::move(inner)), counters_(std::move(c)) {}
  EmbeddingVector embed_audio(const AudioClip& segment) override {
    ++counters_->embed_audio;
    return check(inner_->embed_audio(segment));
  }
  EmbeddingVector embed_text(const std::string& text) override {
    ++counters_->embed_text;
    return check(inner_->embed_text(text));
  }

 private:
  EmbeddingVector check(EmbeddingVector v) {
    if (v.values.empty()) protocol_error("embedder returned an empty vector");
    for (double x : v.values) {
      if (!std::isfinite(x)) protocol_error("embedder returned a non-finite value");
    }
    if (!dimension_) dimension_ = v.values.size();
    if (*dimension_ != v.values.size()) {
      protocol_error("embedder dimension changed from " + std::to_string(*dimension_) + " to " +
                     std::to_string(v.values.size()));
    }
    return v;
  }

  std::shared_ptr<CrossModalEmbedderBackend> inner_;
  std::shared_ptr<CallCounters> counters_;
  std::optional<std::size_t> dimension_;
};

class GuardedSed final : public SoundEventBackend {
 public:
  GuardedSed(std::shared_ptr<SoundEventBackend> inner, std::shared_ptr<CallCounters> c)
      : inner_(std::move(inner)), counters_(std::move(c)) {}
  std::vector<double> sed_boundaries(const AudioClip& audio) override {
    ++counters_->sed;
    auto b = inner_->sed_boundaries(audio);
    for (double t : b) {
      if (!std::isfinite(t) || t < 0.0 || t > audio.duration()) {
        protocol_error("SED boundary " + std::to_string(t) + " lies outside the clip");
      }
    }
    return b;
  }

 private:
  std::shared_ptr<SoundEventBackend> inner_;
  std::shared_ptr<CallCounters> counters_;
};

}  // namespace

BackendSet guarded(const BackendSet& raw, std::shared_ptr<CallCounters> counters) {
  BackendSet out;
  if (raw.chat) out.chat = std::make_shared<GuardedChat>(raw.chat, counters);
  if (raw.grounding) out.grounding = std::make_shared<GuardedGrounding>(raw.grounding, counters);
  if (raw.segmenter) out.segmenter = std::make_shared<GuardedSegmenter>(raw.segmenter, counters);
  if (raw.tagger) out.tagger = std::make_shared<GuardedTagger>(raw.tagger, counters);
  if (raw.embedder) out.embedder = std::make_shared<GuardedEmbedder>(raw.embedder, counters);
  if (raw.sed) out.sed = std::make_shared<GuardedSed>(raw.sed, counters);
  return out;
}

MaskSequence segment_video(VideoSegmenterBackend& segmenter, const VideoClip& clip,
                           const std::vector<SegmentPrompt>& prompts, std::int64_t start_frame,
                           const Reference& referent) {
  require(!prompts.empty(), "segment_video: at least one prompt is required");
  require(start_frame >= 0 && start_frame < clip.size(), "segment_video: start frame out of range");
  const SessionId session = segmenter.open(clip);
  struct Closer {
    VideoSegmenterBackend& s;
    const SessionId& id;
    ~Closer() {
      try {
        s.close(id);
      } catch (...) {
      }
    }
  } closer{segmenter, session};
  for (const auto& p : prompts) segmenter.add_prompt(session, p.frame_index, p.box);
  auto masks = segmenter.propagate(session, start_frame);
  if (static_cast<std::int64_t>(masks.size()) != clip.size()) {
    fail(ErrorCode::protocol, "segmenter returned " + std::to_string(masks.size()) + " masks for " +
                                  std::to_string(clip.size()) + " frames");
  }
  MaskSequence seq;
  seq.masks = std::move(masks);
  seq.silence_flags.assign(seq.masks.size(), false);
  seq.referent = referent;
  return seq;
}

}  // namespace alref::backends
