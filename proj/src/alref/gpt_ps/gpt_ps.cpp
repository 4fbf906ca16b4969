#include "alref/gpt_ps/gpt_ps.hpp"

#include <algorithm>

#include "alref/core/error.hpp"
#include "alref/prompting/replies.hpp"

namespace alref::gpt_ps {

nlohmann::json box_json(const BoundingBox& b) {
  return {{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max},
          {"y_max", b.y_max}, {"score", b.score},  {"label", b.label}};
}

namespace {

void record_frame(prompting::AuditLog* audit, const PivotFrame& f, bool used_llm) {
  if (!audit) return;
  audit->record({{"event", "pivot_frame"},
                 {"strategy", to_string(f.strategy)},
                 {"sampled_position", f.sampled_position},
                 {"frame_index", f.frame_index},
                 {"degraded", f.degraded},
                 {"attempts", f.attempts},
                 {"llm", used_llm}});
}

void record_box(prompting::AuditLog* audit, const PivotBox& b, bool used_llm) {
  if (!audit) return;
  audit->record({{"event", "pivot_box"},
                 {"strategy", to_string(b.strategy)},
                 {"box_id", b.box_id},
                 {"box", box_json(b.box)},
                 {"degraded", b.degraded},
                 {"attempts", b.attempts},
                 {"llm", used_llm}});
}

PivotFrame frame_at(const symbolic::FrameGridImage& grid, int position, FrameStrategy strategy) {
  PivotFrame f;
  f.sampled_position = position;
  f.frame_index = grid.source_indices[static_cast<std::size_t>(position - 1)];
  f.strategy = strategy;
  return f;
}

}  // namespace

const char* to_string(FrameStrategy s) {
  switch (s) {
    case FrameStrategy::gpt: return "gpt";
    case FrameStrategy::first: return "first";
    case FrameStrategy::middle: return "middle";
    case FrameStrategy::last: return "last";
  }
  return "gpt";
}

const char* to_string(BoxStrategy s) {
  switch (s) {
    case BoxStrategy::gpt: return "gpt";
    case BoxStrategy::describe: return "describe";
    case BoxStrategy::nodesc: return "nodesc";
    case BoxStrategy::topscore: return "topscore";
    case BoxStrategy::avs: return "avs";
  }
  return "gpt";
}

FrameStrategy parse_frame_strategy(const std::string& s) {
  if (s == "gpt") return FrameStrategy::gpt;
  if (s == "first") return FrameStrategy::first;
  if (s == "middle") return FrameStrategy::middle;
  if (s == "last") return FrameStrategy::last;
  fail(ErrorCode::config, "unknown frame strategy '" + s + "' (expected gpt|first|middle|last)");
}

BoxStrategy parse_box_strategy(const std::string& s) {
  if (s == "gpt") return BoxStrategy::gpt;
  if (s == "describe") return BoxStrategy::describe;
  if (s == "nodesc") return BoxStrategy::nodesc;
  if (s == "topscore") return BoxStrategy::topscore;
  if (s == "avs") return BoxStrategy::avs;
  fail(ErrorCode::config, "unknown box strategy '" + s + "' (expected gpt|describe|nodesc|topscore|avs)");
}

const char* box_template_for(BoxStrategy s) {
  switch (s) {
    case BoxStrategy::gpt: return "pivot_box";
    case BoxStrategy::describe: return "pivot_box_describe";
    case BoxStrategy::nodesc: return "pivot_box_nodesc";
    case BoxStrategy::avs: return "pivot_box_avs";
    case BoxStrategy::topscore: break;
  }
  fail(ErrorCode::invalid_argument, "the topscore strategy uses no prompt");
}

std::string describe_frame_map(const symbolic::FrameGridImage& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.source_indices.size(); ++i) {
    out += (i == 0 ? "Frame ID " : ", frame ID ");
    out += std::to_string(grid.label_values[i]) + " is video frame " + std::to_string(grid.source_indices[i]);
  }
  return out + ".";
}

PivotFrame select_pivot_frame(const symbolic::FrameGridImage& grid, const Reference& reference,
                              prompting::LlmChannel& llm) {
  require(grid.frame_count >= 1, "select_pivot_frame: empty grid");
  const int m = grid.frame_count;
  if (m == 1) {
    auto f = frame_at(grid, 1, FrameStrategy::gpt);
    record_frame(llm.audit(), f, false);
    return f;
  }

  const prompting::LlmRequest request{"pivot_frame",
                                      kPivotFrameTemplate,
                                      {{"reference", reference.text},
                                       {"frame_count", std::to_string(m)},
                                       {"frame_map", describe_frame_map(grid)}},
                                      {&grid.pixels}};
  auto reply = llm.ask<prompting::ChoiceAnswer>(
      request, [&](const std::string& text) -> std::optional<prompting::ChoiceAnswer> {
        auto a = prompting::parse_choice(text, "frame");
        if (!a) return std::nullopt;
        auto it = std::find(grid.label_values.begin(), grid.label_values.end(), a->value);
        if (it == grid.label_values.end()) return std::nullopt;
        a->value = static_cast<int>(it - grid.label_values.begin()) + 1;
        return a;
      });

  PivotFrame f;
  if (reply.value) {
    f = frame_at(grid, reply.value->value, FrameStrategy::gpt);
    f.event_summary = reply.value->event.empty() ? reply.value->rationale : reply.value->event;
  } else {
    f = frame_at(grid, (m + 1) / 2, FrameStrategy::gpt);
    f.degraded = true;
  }
  f.attempts = reply.attempts;
  record_frame(llm.audit(), f, true);
  return f;
}

PivotFrame fixed_pivot_frame(const symbolic::FrameGridImage& grid, FrameStrategy strategy,
                             prompting::AuditLog* audit) {
  require(grid.frame_count >= 1, "fixed_pivot_frame: empty grid");
  const int m = grid.frame_count;
  int position = 1;
  switch (strategy) {
    case FrameStrategy::first: position = 1; break;
    case FrameStrategy::middle: position = (m + 1) / 2; break;
    case FrameStrategy::last: position = m; break;
    case FrameStrategy::gpt: fail(ErrorCode::invalid_argument, "fixed_pivot_frame needs a rule-based strategy");
  }
  auto f = frame_at(grid, position, strategy);
  record_frame(audit, f, false);
  return f;
}

std::vector<BoundingBox> deduplicate(std::vector<BoundingBox> boxes, double iou) {
  std::stable_sort(boxes.begin(), boxes.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  std::vector<BoundingBox> kept;
  for (auto& b : boxes) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const auto& k) { return box_iou(k, b) > iou; });
    if (!duplicate) kept.push_back(std::move(b));
  }
  return kept;
}

CandidateBoxSet generate_candidates(const FrameImage& frame, const Reference& reference,
                                    backends::GroundingBackend& detector, Thresholds thresholds, int max_candidates,
                                    prompting::AuditLog* audit) {
  require(thresholds.text > 0.0 && thresholds.text < 1.0 && thresholds.box > 0.0 && thresholds.box < 1.0,
          "generate_candidates: thresholds must lie in (0, 1)");
  require(max_candidates >= 1, "generate_candidates: max_candidates must be >= 1");

  CandidateBoxSet set;
  for (int round = 0; round < 2; ++round) {
    const Thresholds t = round == 0 ? thresholds : Thresholds{thresholds.text / 2, thresholds.box / 2};
    auto raw = detector.ground(frame.pixels, reference.text, t.text, t.box);
    std::erase_if(raw, [&](const BoundingBox& b) { return b.score < t.box; });
    auto boxes = deduplicate(std::move(raw));
    if (static_cast<int>(boxes.size()) > max_candidates) boxes.resize(static_cast<std::size_t>(max_candidates));
    set.boxes = std::move(boxes);
    set.thresholds = t;
    set.halved = round == 1;
    if (audit) {
      nlohmann::json listed = nlohmann::json::array();
      for (const auto& b : set.boxes) listed.push_back(box_json(b));
      audit->record({{"event", "candidates"},
                     {"frame_index", frame.index},
                     {"text_threshold", t.text},
                     {"box_threshold", t.box},
                     {"halved", set.halved},
                     {"boxes", listed}});
    }
    if (!set.boxes.empty()) return set;
  }
  fail(ErrorCode::referent_absent, "no candidate boxes for \"" + reference.text + "\" on frame " +
                                       std::to_string(frame.index) + " even at halved thresholds");
}

PivotBox top_score_box(const symbolic::MarkedBoxImage& marked, prompting::AuditLog* audit) {
  require(!marked.box_ids.empty(), "top_score_box: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < marked.box_ids.size(); ++i) {
    if (marked.box_ids[i].score > marked.box_ids[best].score) best = i;
  }
  PivotBox b;
  b.box_id = static_cast<int>(best) + 1;
  b.box = marked.box_ids[best];
  b.strategy = BoxStrategy::topscore;
  record_box(audit, b, false);
  return b;
}

PivotBox select_pivot_box(const symbolic::FrameGridImage& context, const symbolic::MarkedBoxImage& marked,
                          const Reference& reference, const std::string& event_summary, prompting::LlmChannel& llm,
                          BoxStrategy strategy) {
  require(!marked.box_ids.empty(), "select_pivot_box: no candidates");
  if (strategy == BoxStrategy::topscore) return top_score_box(marked, llm.audit());

  const int count = static_cast<int>(marked.box_ids.size());
  if (count == 1) {
    PivotBox b;
    b.box_id = 1;
    b.box = marked.box_ids.front();
    b.strategy = strategy;
    record_box(llm.audit(), b, false);
    return b;
  }

  auto pos = std::find(context.source_indices.begin(), context.source_indices.end(), marked.frame_index);
  require(pos != context.source_indices.end(), "select_pivot_box: pivot frame is not part of the context grid");
  const int pivot_label = context.label_values[static_cast<std::size_t>(pos - context.source_indices.begin())];

  const prompting::LlmRequest request{
      "pivot_box",
      box_template_for(strategy),
      {{"reference", reference.text},
       {"event_summary", event_summary.empty() ? std::string("(not available)") : event_summary},
       {"box_count", std::to_string(count)},
       {"pivot_label", std::to_string(pivot_label)},
       {"frame_count", std::to_string(context.frame_count)}},
      {&context.pixels, &marked.pixels}};
  auto reply = llm.ask<prompting::ChoiceAnswer>(
      request, [&](const std::string& text) -> std::optional<prompting::ChoiceAnswer> {
        auto a = prompting::parse_choice(text, "box");
        if (!a || a->value < 1 || a->value > count) return std::nullopt;
        return a;
      });

  PivotBox b;
  if (reply.value) {
    b.box_id = reply.value->value;
    b.box = marked.box_ids[static_cast<std::size_t>(b.box_id - 1)];
    b.rationale = reply.value->rationale;
  } else {
    b = top_score_box(marked);
    b.degraded = true;
  }
  b.strategy = strategy;
  b.attempts = reply.attempts;
  record_box(llm.audit(), b, true);
  return b;
}

}  // namespace alref::gpt_ps
