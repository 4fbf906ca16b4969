#pragma once

#include <cstdint>
#include <vector>

namespace alref::orchestrator {

struct ClipWindow {
  std::int64_t start = 0;  // inclusive
  std::int64_t end = 0;    // exclusive
  std::vector<std::int64_t> sampled;
  friend bool operator==(const ClipWindow&, const ClipWindow&) = default;
};

struct ClipPlan {
  std::vector<ClipWindow> clips;
  int frames_per_clip = 5;
  int interval = 1;
};

// Tiles [0, T) into clips of frames_per_clip * interval frames. A trailing
// remainder of at least half a span becomes its own clip sampled by even
// spread; a shorter one is absorbed by the previous clip.
ClipPlan plan_clips(std::int64_t frame_count, int frames_per_clip, int interval);

/// One clip over the whole video with `frames` evenly spread samples.
ClipPlan single_clip_plan(std::int64_t frame_count, int frames);

/// 0-based index of the ceil(n/2)-th clip.
std::size_t middle_clip_index(std::size_t clip_count);

}  // namespace alref::orchestrator
