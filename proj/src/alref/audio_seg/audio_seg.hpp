#pragma once

#include <string>
#include <vector>

#include "alref/backends/interfaces.hpp"
#include "alref/core/audio.hpp"
#include "alref/core/types.hpp"

namespace alref::audio_seg {

inline constexpr double kMinSegmentSeconds = 0.5;
inline constexpr int kMaxCategories = 6;

struct AudioSegment {
  double start = 0.0;
  double end = 0.0;
  int index = 0;  // 0-based
  friend bool operator==(const AudioSegment&, const AudioSegment&) = default;
};

struct SegmentationOutcome {
  std::vector<AudioSegment> segments;
  bool degraded = false;
  std::string warning;
};

struct LabelCombination {
  std::vector<std::string> categories;
  std::string rendered_text;  // categories joined with " and "
};

struct SegmentLabelAssignment {
  std::vector<int> combination;  // l^i, 1-based into the combination list
  std::vector<std::vector<std::string>> categories;
  bool degraded = false;
};

/// Contiguous cover of [0, duration] from interior change points; segments
/// shorter than `min_length` are merged into the following one (the last
/// into its predecessor).
std::vector<AudioSegment> segments_from_boundaries(std::vector<double> boundaries, double duration,
                                                   double min_length = kMinSegmentSeconds);

SegmentationOutcome segment_audio(const AudioClip& audio, backends::SoundEventBackend& sed,
                                  double min_length = kMinSegmentSeconds);

/// All 2^n - 1 non-empty subsets ordered by size, then lexicographically by
/// position in `categories`.
std::vector<LabelCombination> enumerate_combinations(const std::vector<std::string>& categories,
                                                     int n_cap = kMaxCategories);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// argmax_j cos(audio[i], text[j]) per segment; the first maximum in
/// enumeration order wins ties. Returns 1-based indices.
std::vector<int> argmax_labels(const std::vector<backends::EmbeddingVector>& audio,
                               const std::vector<backends::EmbeddingVector>& text);

SegmentLabelAssignment assign_labels(const AudioClip& audio, const std::vector<AudioSegment>& segments,
                                     const std::vector<LabelCombination>& combinations,
                                     backends::CrossModalEmbedderBackend& embedder);

/// Segment holding time t under half-open [start, end) windows; times at or
/// past the end map to the last segment.
std::size_t segment_at(const std::vector<AudioSegment>& segments, double t);

/// flag[f] is true when `category` is absent from the label set of the
/// segment containing frame f's midpoint timestamp.
std::vector<bool> silence_map(const SegmentLabelAssignment& assignment, const std::vector<AudioSegment>& segments,
                              const std::string& category, std::int64_t frame_count, Rational fps);

/// Zeroes masks on silent frames and records the flags. Idempotent.
void apply_silence(MaskSequence& masks, const std::vector<bool>& silent);

}  // namespace alref::audio_seg
