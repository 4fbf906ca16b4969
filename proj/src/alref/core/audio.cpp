#include "alref/core/audio.hpp"

#include <algorithm>
#include <cmath>

#include "alref/core/error.hpp"

namespace alref {

AudioClip::AudioClip(std::vector<float> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  require(sample_rate_ > 0, "audio sample rate must be positive");
}

AudioClip AudioClip::slice(double start, double end) const {
  const auto n = static_cast<long long>(samples_.size());
  const auto lo = std::clamp(static_cast<long long>(std::llround(start * sample_rate_)), 0LL, n);
  const auto hi = std::clamp(static_cast<long long>(std::llround(end * sample_rate_)), lo, n);
  return AudioClip(std::vector<float>(samples_.begin() + lo, samples_.begin() + hi), sample_rate_);
}

}  // namespace alref
