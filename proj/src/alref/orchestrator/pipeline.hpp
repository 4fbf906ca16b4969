#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alref/audio_seg/audio_seg.hpp"
#include "alref/backends/interfaces.hpp"
#include "alref/core/audio.hpp"
#include "alref/core/types.hpp"
#include "alref/gpt_ps/gpt_ps.hpp"
#include "alref/lbru/lbru.hpp"
#include "alref/orchestrator/clip_plan.hpp"
#include "alref/orchestrator/config.hpp"
#include "alref/prompting/llm_channel.hpp"

namespace alref::orchestrator {

// Everything one sample run needs. Backends are expected to be wrapped by
// backends::guarded already.
struct PipelineContext {
  const PipelineConfig& config;
  const backends::BackendSet& backends;
  prompting::LlmChannel& llm;
  prompting::AuditLog* audit = nullptr;
};

struct ClipRecord {
  std::size_t clip_index = 0;
  ClipWindow window;
  std::optional<gpt_ps::PivotSelection> selection;
  std::size_t candidate_count = 0;
  gpt_ps::Thresholds thresholds;
  bool halved = false;
  bool referent_absent = false;
};

struct ReferenceReport {
  Reference reference;
  ClipPlan plan;
  std::vector<ClipRecord> clips;
  std::optional<std::size_t> start_clip;  // index into clips
  std::int64_t start_frame = -1;
  bool all_absent = false;
  bool degraded = false;
  std::vector<std::string> warnings;
};

struct ReferenceResult {
  MaskSequence masks;
  ReferenceReport report;
};

/// Pivot selection for one clip window. Referent-absent detection is recorded,
/// not thrown.
ClipRecord select_for_clip(const VideoClip& clip, const ClipWindow& window, std::size_t clip_index,
                           const Reference& reference, PipelineContext& ctx);

/// Clip to start propagation from: the middle clip, or the nearest clip with
/// a selection (earlier on ties). nullopt when every clip is absent.
std::optional<std::size_t> choose_start_clip(const std::vector<ClipRecord>& clips);

ReferenceResult run_reference(const VideoClip& clip, const Reference& reference, PipelineContext& ctx,
                              const ClipPlan& plan);

/// RVOS entry point: plans clips from the configured span.
ReferenceResult run_reference(const VideoClip& clip, const Reference& reference, PipelineContext& ctx);

struct AvsResult {
  lbru::AudioTagList tags;
  lbru::CategoryOutcome categories;
  audio_seg::SegmentationOutcome segmentation;
  std::vector<audio_seg::LabelCombination> combinations;
  audio_seg::SegmentLabelAssignment assignment;
  std::vector<ReferenceResult> references;
  bool no_categories = false;
  bool degraded = false;
};

AvsResult run_avs_video(const VideoClip& clip, const AudioClip& audio, PipelineContext& ctx);

/// Per-frame union of all reference masks (all-empty when there are none).
std::vector<BinaryMask> union_masks(const VideoClip& clip, const std::vector<ReferenceResult>& refs);

nlohmann::json to_json(const ReferenceReport& r);
nlohmann::json to_json(const AvsResult& r);

}  // namespace alref::orchestrator
