#include "alref/orchestrator/clip_plan.hpp"

#include "alref/core/error.hpp"
#include "alref/symbolic/symbolic.hpp"

namespace alref::orchestrator {

ClipPlan plan_clips(std::int64_t frame_count, int frames_per_clip, int interval) {
  if (frame_count <= 0) fail(ErrorCode::invalid_argument, "plan_clips: video has no frames");
  require(frames_per_clip >= 1, "plan_clips: frames_per_clip must be >= 1");
  require(interval >= 1, "plan_clips: interval must be >= 1");

  ClipPlan plan;
  plan.frames_per_clip = frames_per_clip;
  plan.interval = interval;
  const std::int64_t span = static_cast<std::int64_t>(frames_per_clip) * interval;
  const std::int64_t full = frame_count / span;
  const std::int64_t remainder = frame_count % span;

  if (full == 0) {
    plan.clips.push_back({0, frame_count, symbolic::sample_window(0, frame_count, frames_per_clip, interval)});
    return plan;
  }
  for (std::int64_t k = 0; k < full; ++k) {
    const std::int64_t start = k * span;
    plan.clips.push_back({start, start + span, symbolic::sample_window(start, start + span, frames_per_clip, interval)});
  }
  if (remainder > 0) {
    if (2 * remainder < span) {
      plan.clips.back().end = frame_count;
    } else {
      const std::int64_t start = full * span;
      plan.clips.push_back({start, frame_count, symbolic::sample_window(start, frame_count, frames_per_clip, interval)});
    }
  }
  return plan;
}

ClipPlan single_clip_plan(std::int64_t frame_count, int frames) {
  if (frame_count <= 0) fail(ErrorCode::invalid_argument, "single_clip_plan: video has no frames");
  ClipPlan plan;
  plan.frames_per_clip = frames;
  plan.interval = 1;
  plan.clips.push_back({0, frame_count, symbolic::even_spread(0, frame_count, frames)});
  return plan;
}

std::size_t middle_clip_index(std::size_t clip_count) {
  require(clip_count >= 1, "middle_clip_index: no clips");
  return (clip_count + 1) / 2 - 1;
}

}  // namespace alref::orchestrator
