#pragma once

#include <vector>

namespace alref {

/// Mono waveform in [-1, 1].
class AudioClip {
 public:
  AudioClip() = default;
  AudioClip(std::vector<float> samples, int sample_rate);

  const std::vector<float>& samples() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  double duration() const { return static_cast<double>(samples_.size()) / sample_rate_; }
  bool empty() const { return samples_.empty(); }

  /// Samples in [start, end) seconds, clamped to the clip.
  AudioClip slice(double start, double end) const;

 private:
  std::vector<float> samples_;
  int sample_rate_ = 16000;
};

}  // namespace alref
