#include "alref/audio_seg/audio_seg.hpp"

#include <algorithm>
#include <cmath>

#include "alref/core/error.hpp"
#include "alref/prompting/replies.hpp"

namespace alref::audio_seg {

std::vector<AudioSegment> segments_from_boundaries(std::vector<double> boundaries, double duration,
                                                   double min_length) {
  require(duration > 0.0, "segments need a positive duration");
  std::sort(boundaries.begin(), boundaries.end());
  std::vector<double> edges{0.0};
  for (double b : boundaries) {
    if (b > 0.0 && b < duration && b > edges.back()) edges.push_back(b);
  }
  edges.push_back(duration);

  std::size_t i = 0;
  while (edges.size() > 2 && i + 1 < edges.size()) {
    const bool last = i + 2 == edges.size();
    if (edges[i + 1] - edges[i] >= min_length) {
      ++i;
      continue;
    }
    if (last) {
      edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(i));
      if (i > 0) --i;
    } else {
      edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(i + 1));
    }
  }

  std::vector<AudioSegment> out;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    out.push_back(AudioSegment{edges[k], edges[k + 1], static_cast<int>(k)});
  }
  return out;
}

SegmentationOutcome segment_audio(const AudioClip& audio, backends::SoundEventBackend& sed, double min_length) {
  require(!audio.empty(), "segment_audio: empty audio");
  SegmentationOutcome outcome;
  try {
    outcome.segments = segments_from_boundaries(sed.sed_boundaries(audio), audio.duration(), min_length);
  } catch (const Error& e) {
    outcome.segments = {AudioSegment{0.0, audio.duration(), 0}};
    outcome.degraded = true;
    outcome.warning = std::string("sound event detection failed, using one segment: ") + e.what();
  }
  return outcome;
}

std::vector<LabelCombination> enumerate_combinations(const std::vector<std::string>& categories, int n_cap) {
  const int n = static_cast<int>(categories.size());
  require(n >= 1, "enumerate_combinations: no categories");
  if (n > n_cap) {
    fail(ErrorCode::config, std::to_string(n) + " sounding categories exceed the cap of " + std::to_string(n_cap) +
                                "; raise pipeline.max_sounding_categories to enumerate 2^n-1 combinations");
  }
  std::vector<LabelCombination> out;
  for (int size = 1; size <= n; ++size) {
    // Lexicographic k-combinations of positions.
    std::vector<int> pick(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      LabelCombination c;
      for (int p : pick) {
        c.categories.push_back(categories[static_cast<std::size_t>(p)]);
        if (!c.rendered_text.empty()) c.rendered_text += " and ";
        c.rendered_text += categories[static_cast<std::size_t>(p)];
      }
      out.push_back(std::move(c));
      int i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<int> argmax_labels(const std::vector<backends::EmbeddingVector>& audio,
                               const std::vector<backends::EmbeddingVector>& text) {
  require(!text.empty(), "argmax_labels: no label embeddings");
  std::vector<int> out;
  out.reserve(audio.size());
  for (const auto& a : audio) {
    std::size_t best = 0;
    double best_sim = cosine_similarity(a.values, text[0].values);
    for (std::size_t j = 1; j < text.size(); ++j) {
      const double s = cosine_similarity(a.values, text[j].values);
      if (s > best_sim) {
        best_sim = s;
        best = j;
      }
    }
    out.push_back(static_cast<int>(best) + 1);
  }
  return out;
}

SegmentLabelAssignment assign_labels(const AudioClip& audio, const std::vector<AudioSegment>& segments,
                                     const std::vector<LabelCombination>& combinations,
                                     backends::CrossModalEmbedderBackend& embedder) {
  require(!segments.empty(), "assign_labels: no segments");
  require(!combinations.empty(), "assign_labels: no label combinations");
  SegmentLabelAssignment out;
  try {
    std::vector<backends::EmbeddingVector> text;
    for (const auto& c : combinations) text.push_back(embedder.embed_text(c.rendered_text));
    std::vector<backends::EmbeddingVector> sound;
    for (const auto& s : segments) sound.push_back(embedder.embed_audio(audio.slice(s.start, s.end)));
    out.combination = argmax_labels(sound, text);
  } catch (const Error&) {
    // The full category set is the single largest subset, enumerated last.
    out.combination.assign(segments.size(), static_cast<int>(combinations.size()));
    out.degraded = true;
  }
  for (int l : out.combination) out.categories.push_back(combinations[static_cast<std::size_t>(l - 1)].categories);
  return out;
}

std::size_t segment_at(const std::vector<AudioSegment>& segments, double t) {
  require(!segments.empty(), "segment_at: no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (t < segments[i].end) return i;
  }
  return segments.size() - 1;
}

std::vector<bool> silence_map(const SegmentLabelAssignment& assignment, const std::vector<AudioSegment>& segments,
                              const std::string& category, std::int64_t frame_count, Rational fps) {
  require(assignment.categories.size() == segments.size(), "silence_map: assignment does not match segments");
  const std::string wanted = prompting::normalize_category(category);
  std::vector<bool> silent(static_cast<std::size_t>(frame_count), false);
  for (std::int64_t f = 0; f < frame_count; ++f) {
    const double midpoint = static_cast<double>(2 * f + 1) * static_cast<double>(fps.den) /
                            (2.0 * static_cast<double>(fps.num));
    const auto& present = assignment.categories[segment_at(segments, midpoint)];
    const bool sounding = std::any_of(present.begin(), present.end(), [&](const std::string& c) {
      return prompting::normalize_category(c) == wanted;
    });
    silent[static_cast<std::size_t>(f)] = !sounding;
  }
  return silent;
}

void apply_silence(MaskSequence& masks, const std::vector<bool>& silent) {
  require(silent.size() == masks.masks.size(), "apply_silence: flag count differs from mask count");
  masks.silence_flags.resize(masks.masks.size(), false);
  for (std::size_t f = 0; f < silent.size(); ++f) {
    if (!silent[f]) continue;
    masks.masks[f].clear();
    masks.silence_flags[f] = true;
  }
}

}  // namespace alref::audio_seg
