#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alref/backends/interfaces.hpp"
#include "alref/core/types.hpp"
#include "alref/prompting/llm_channel.hpp"
#include "alref/symbolic/symbolic.hpp"

namespace alref::gpt_ps {

inline constexpr const char* kPivotFrameTemplate = "pivot_frame";

enum class FrameStrategy { gpt, first, middle, last };

// Prompt variants for the box step; `topscore` skips the LLM entirely.
enum class BoxStrategy { gpt, describe, nodesc, topscore, avs };

const char* to_string(FrameStrategy s);
const char* to_string(BoxStrategy s);
FrameStrategy parse_frame_strategy(const std::string& s);
BoxStrategy parse_box_strategy(const std::string& s);
const char* box_template_for(BoxStrategy s);

struct Thresholds {
  double text = 0.2;
  double box = 0.15;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

inline constexpr Thresholds kRvosThresholds{0.2, 0.15};
inline constexpr Thresholds kAvsThresholds{0.25, 0.25};
inline constexpr int kMaxCandidates = 8;
inline constexpr double kDuplicateIou = 0.9;

struct PivotFrame {
  int sampled_position = 1;  // 1-based within the sampled set
  std::int64_t frame_index = 0;
  std::string event_summary;
  bool degraded = false;
  int attempts = 0;
  FrameStrategy strategy = FrameStrategy::gpt;
};

struct CandidateBoxSet {
  std::vector<BoundingBox> boxes;  // score non-increasing
  Thresholds thresholds;           // the thresholds that produced `boxes`
  bool halved = false;
};

struct PivotBox {
  int box_id = 1;  // painted ID, 1-based
  BoundingBox box;
  std::string rationale;
  bool degraded = false;
  int attempts = 0;
  BoxStrategy strategy = BoxStrategy::gpt;
};

struct PivotSelection {
  PivotFrame pivot_frame;
  PivotBox pivot_box;
};

/// Temporal step. A single-cell grid is answered without an LLM call.
PivotFrame select_pivot_frame(const symbolic::FrameGridImage& grid, const Reference& reference,
                              prompting::LlmChannel& llm);

/// Rule-based first/middle/last selection over the sampled set (no LLM).
PivotFrame fixed_pivot_frame(const symbolic::FrameGridImage& grid, FrameStrategy strategy,
                             prompting::AuditLog* audit = nullptr);

/// Detector boxes at lowered thresholds, filtered, de-duplicated and capped.
/// Throws ErrorCode::referent_absent when nothing survives a halved retry.
CandidateBoxSet generate_candidates(const FrameImage& frame, const Reference& reference,
                                    backends::GroundingBackend& detector, Thresholds thresholds,
                                    int max_candidates = kMaxCandidates, prompting::AuditLog* audit = nullptr);

/// Greedy score-ordered suppression of boxes overlapping a kept box by IoU > `iou`.
std::vector<BoundingBox> deduplicate(std::vector<BoundingBox> boxes, double iou = kDuplicateIou);

/// Spatial step. A single candidate is answered without an LLM call.
PivotBox select_pivot_box(const symbolic::FrameGridImage& context, const symbolic::MarkedBoxImage& marked,
                          const Reference& reference, const std::string& event_summary,
                          prompting::LlmChannel& llm, BoxStrategy strategy = BoxStrategy::gpt);

/// Highest-scoring painted candidate (first on ties).
PivotBox top_score_box(const symbolic::MarkedBoxImage& marked, prompting::AuditLog* audit = nullptr);

nlohmann::json box_json(const BoundingBox& b);

/// "Frame ID 1 is video frame 0, frame ID 2 is video frame 10, ..."
std::string describe_frame_map(const symbolic::FrameGridImage& grid);

}  // namespace alref::gpt_ps
