#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alref/core/audio.hpp"
#include "alref/core/types.hpp"

namespace alref::backends {

enum class BackendKind { chat_vision, grounding, video_segmenter, audio_tagger, cross_modal_embedder, sound_event };

const char* to_string(BackendKind kind);

struct ScoredLabel {
  std::string label;
  double score = 0.0;
  friend bool operator==(const ScoredLabel&, const ScoredLabel&) = default;
};

struct EmbeddingVector {
  std::vector<double> values;
};

using SessionId = std::string;

class ChatVisionBackend {
 public:
  virtual ~ChatVisionBackend() = default;
  /// One logical request; the reply is returned verbatim.
  virtual std::string chat(std::span<const Raster* const> images, const std::string& text) = 0;
};

class GroundingBackend {
 public:
  virtual ~GroundingBackend() = default;
  virtual std::vector<BoundingBox> ground(const Raster& image, const std::string& phrase, double text_threshold,
                                          double box_threshold) = 0;
};

class VideoSegmenterBackend {
 public:
  virtual ~VideoSegmenterBackend() = default;
  virtual SessionId open(const VideoClip& clip) = 0;
  virtual void add_prompt(const SessionId& session, std::int64_t frame_index, const BoundingBox& box) = 0;
  /// One mask per frame of the session's video.
  virtual std::vector<BinaryMask> propagate(const SessionId& session, std::int64_t start_frame) = 0;
  virtual void close(const SessionId&) {}
};

class AudioTaggerBackend {
 public:
  virtual ~AudioTaggerBackend() = default;
  virtual std::vector<ScoredLabel> tag_audio(const AudioClip& audio) = 0;
};

class CrossModalEmbedderBackend {
 public:
  virtual ~CrossModalEmbedderBackend() = default;
  virtual EmbeddingVector embed_audio(const AudioClip& segment) = 0;
  virtual EmbeddingVector embed_text(const std::string& text) = 0;
};

class SoundEventBackend {
 public:
  virtual ~SoundEventBackend() = default;
  /// Interior change points in seconds.
  virtual std::vector<double> sed_boundaries(const AudioClip& audio) = 0;
};

struct CallCounters {
  std::atomic<int> chat{0};
  std::atomic<int> ground{0};
  std::atomic<int> segment_open{0};
  std::atomic<int> segment_prompt{0};
  std::atomic<int> segment_propagate{0};
  std::atomic<int> audio_tag{0};
  std::atomic<int> embed_audio{0};
  std::atomic<int> embed_text{0};
  std::atomic<int> sed{0};
};

struct BackendSet {
  std::shared_ptr<ChatVisionBackend> chat;
  std::shared_ptr<GroundingBackend> grounding;
  std::shared_ptr<VideoSegmenterBackend> segmenter;
  std::shared_ptr<AudioTaggerBackend> tagger;
  std::shared_ptr<CrossModalEmbedderBackend> embedder;
  std::shared_ptr<SoundEventBackend> sed;
};

// Wraps every backend so responses are validated before domain code sees
// them and every call is counted.
BackendSet guarded(const BackendSet& raw, std::shared_ptr<CallCounters> counters);

struct SegmentPrompt {
  std::int64_t frame_index = 0;
  BoundingBox box;
};

/// Opens a session, registers all prompts, propagates from `start_frame`,
/// and returns one mask per frame. Closes the session on every path.
MaskSequence segment_video(VideoSegmenterBackend& segmenter, const VideoClip& clip,
                           const std::vector<SegmentPrompt>& prompts, std::int64_t start_frame,
                           const Reference& referent);

}  // namespace alref::backends
