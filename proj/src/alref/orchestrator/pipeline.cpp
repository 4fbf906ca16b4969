#include "alref/orchestrator/pipeline.hpp"

#include <cmath>

#include "alref/core/error.hpp"

namespace alref::orchestrator {

using nlohmann::json;

ClipRecord select_for_clip(const VideoClip& clip, const ClipWindow& window, std::size_t clip_index,
                           const Reference& reference, PipelineContext& ctx) {
  const PipelineConfig& cfg = ctx.config;
  ClipRecord record;
  record.clip_index = clip_index;
  record.window = window;
  if (ctx.audit) {
    ctx.audit->record({{"event", "clip"},
                       {"clip_index", clip_index},
                       {"start", window.start},
                       {"end", window.end},
                       {"sampled", window.sampled}});
  }

  const symbolic::GridOptions grid_options{cfg.cells_per_row, cfg.label_mode};
  const auto grid = symbolic::compose_grid(clip, window.sampled, grid_options);

  gpt_ps::PivotFrame frame = cfg.frame_strategy == gpt_ps::FrameStrategy::gpt
                                 ? gpt_ps::select_pivot_frame(grid, reference, ctx.llm)
                                 : gpt_ps::fixed_pivot_frame(grid, cfg.frame_strategy, ctx.audit);

  const FrameImage& pivot = clip.frame(frame.frame_index);
  gpt_ps::CandidateBoxSet candidates;
  try {
    candidates = gpt_ps::generate_candidates(pivot, reference, *ctx.backends.grounding, cfg.thresholds,
                                             cfg.max_candidates, ctx.audit);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::referent_absent) throw;
    record.referent_absent = true;
    if (ctx.audit) ctx.audit->record({{"event", "referent_absent"}, {"clip_index", clip_index}, {"reason", e.what()}});
    return record;
  }
  record.candidate_count = candidates.boxes.size();
  record.thresholds = candidates.thresholds;
  record.halved = candidates.halved;

  const auto marked = symbolic::paint_boxes(pivot, candidates.boxes);
  const auto strategy = cfg.effective_box_strategy();
  gpt_ps::PivotBox box;
  if (strategy == gpt_ps::BoxStrategy::topscore) {
    box = gpt_ps::top_score_box(marked, ctx.audit);
  } else {
    const auto context = symbolic::compose_pivot_context(marked, clip, window.sampled, grid_options);
    box = gpt_ps::select_pivot_box(context, marked, reference, frame.event_summary, ctx.llm, strategy);
  }
  record.selection = gpt_ps::PivotSelection{std::move(frame), std::move(box)};
  return record;
}

std::optional<std::size_t> choose_start_clip(const std::vector<ClipRecord>& clips) {
  if (clips.empty()) return std::nullopt;
  const std::size_t middle = middle_clip_index(clips.size());
  for (std::size_t d = 0; d < clips.size(); ++d) {
    if (middle >= d && clips[middle - d].selection) return middle - d;
    if (middle + d < clips.size() && clips[middle + d].selection) return middle + d;
  }
  return std::nullopt;
}

ReferenceResult run_reference(const VideoClip& clip, const Reference& reference, PipelineContext& ctx,
                              const ClipPlan& plan) {
  require(!reference.text.empty(), "run_reference: empty reference");
  ReferenceResult result;
  ReferenceReport& report = result.report;
  report.reference = reference;
  report.plan = plan;
  if (ctx.audit) {
    ctx.audit->record({{"event", "reference"}, {"text", reference.text}, {"clips", plan.clips.size()}});
  }

  for (std::size_t i = 0; i < plan.clips.size(); ++i) {
    report.clips.push_back(select_for_clip(clip, plan.clips[i], i, reference, ctx));
  }

  std::vector<backends::SegmentPrompt> prompts;
  for (const auto& c : report.clips) {
    if (!c.selection) continue;
    prompts.push_back({c.selection->pivot_frame.frame_index, c.selection->pivot_box.box});
    if (c.selection->pivot_frame.degraded || c.selection->pivot_box.degraded) report.degraded = true;
  }

  report.start_clip = choose_start_clip(report.clips);
  if (!report.start_clip) {
    report.all_absent = true;
    report.warnings.push_back("referent absent in every clip; masks left empty");
    result.masks = MaskSequence::empty_for(clip, reference);
  } else {
    const std::size_t middle = middle_clip_index(report.clips.size());
    if (*report.start_clip != middle) {
      report.warnings.push_back("middle clip " + std::to_string(middle) + " has no pivot; starting from clip " +
                                std::to_string(*report.start_clip));
    }
    report.start_frame = report.clips[*report.start_clip].selection->pivot_frame.frame_index;
    result.masks = backends::segment_video(*ctx.backends.segmenter, clip, prompts, report.start_frame, reference);
  }

  if (ctx.audit) {
    ctx.audit->record({{"event", "propagation"},
                       {"prompts", prompts.size()},
                       {"start_frame", report.start_frame},
                       {"all_absent", report.all_absent}});
  }
  return result;
}

ReferenceResult run_reference(const VideoClip& clip, const Reference& reference, PipelineContext& ctx) {
  return run_reference(clip, reference, ctx, plan_clips(clip.size(), ctx.config.frames_per_clip, ctx.config.interval));
}

AvsResult run_avs_video(const VideoClip& clip, const AudioClip& audio, PipelineContext& ctx) {
  const PipelineConfig& cfg = ctx.config;
  require(!audio.empty(), "run_avs_video: empty audio");
  const double frame_period = 1.0 / clip.fps().value();
  if (std::abs(audio.duration() - clip.duration_seconds()) > frame_period + 1e-9) {
    fail(ErrorCode::invalid_argument, "audio lasts " + std::to_string(audio.duration()) + " s but the video lasts " +
                                          std::to_string(clip.duration_seconds()) + " s");
  }

  AvsResult out;
  out.tags = lbru::collect_audio_tags(audio, *ctx.backends.tagger, cfg.top_k);
  const auto plan = single_clip_plan(clip.size(), cfg.avs_frames);
  if (ctx.audit) ctx.audit->record({{"event", "lbru_grid"}, {"sampled", plan.clips.front().sampled}});
  auto grid = symbolic::compose_grid(clip, plan.clips.front().sampled, {cfg.cells_per_row, cfg.label_mode});
  const auto bundle = lbru::build_prompt_bundle(out.tags, std::move(grid));
  out.categories = lbru::identify_sounding_categories(bundle, out.tags, ctx.llm);
  out.degraded = out.categories.degraded;

  const auto& categories = out.categories.set.categories;
  if (categories.empty()) {
    out.no_categories = true;
    return out;
  }

  out.segmentation = audio_seg::segment_audio(audio, *ctx.backends.sed, cfg.min_segment_seconds);
  out.combinations = audio_seg::enumerate_combinations(categories, cfg.max_categories);
  if (out.combinations.size() == 1) {
    // A single category leaves nothing to discriminate.
    out.assignment.combination.assign(out.segmentation.segments.size(), 1);
    out.assignment.categories.assign(out.segmentation.segments.size(), out.combinations.front().categories);
  } else {
    out.assignment = audio_seg::assign_labels(audio, out.segmentation.segments, out.combinations, *ctx.backends.embedder);
  }
  out.degraded = out.degraded || out.segmentation.degraded || out.assignment.degraded;
  if (ctx.audit) {
    json segs = json::array();
    for (std::size_t i = 0; i < out.segmentation.segments.size(); ++i) {
      const auto& s = out.segmentation.segments[i];
      segs.push_back({{"start", s.start},
                      {"end", s.end},
                      {"combination", out.assignment.combination[i]},
                      {"categories", out.assignment.categories[i]}});
    }
    ctx.audit->record({{"event", "audio_segments"},
                       {"segments", segs},
                       {"sed_degraded", out.segmentation.degraded},
                       {"embed_degraded", out.assignment.degraded}});
  }

  for (const auto& category : categories) {
    auto ref = run_reference(clip, lbru::render_reference(category), ctx, plan);
    const auto silent = audio_seg::silence_map(out.assignment, out.segmentation.segments, category, clip.size(),
                                               clip.fps());
    audio_seg::apply_silence(ref.masks, silent);
    out.degraded = out.degraded || ref.report.degraded;
    out.references.push_back(std::move(ref));
  }
  return out;
}

std::vector<BinaryMask> union_masks(const VideoClip& clip, const std::vector<ReferenceResult>& refs) {
  std::vector<BinaryMask> out(static_cast<std::size_t>(clip.size()), BinaryMask(clip.height(), clip.width()));
  for (const auto& r : refs) {
    for (std::size_t f = 0; f < out.size(); ++f) {
      const auto& src = r.masks.masks[f].bits;
      auto& dst = out[f].bits;
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
    }
  }
  return out;
}

namespace {

json selection_json(const gpt_ps::PivotSelection& s) {
  const auto& f = s.pivot_frame;
  const auto& b = s.pivot_box;
  return {{"pivot_frame",
           {{"sampled_position", f.sampled_position},
            {"frame_index", f.frame_index},
            {"strategy", gpt_ps::to_string(f.strategy)},
            {"degraded", f.degraded},
            {"attempts", f.attempts},
            {"event_summary", f.event_summary}}},
          {"pivot_box",
           {{"box_id", b.box_id},
            {"box", gpt_ps::box_json(b.box)},
            {"strategy", gpt_ps::to_string(b.strategy)},
            {"degraded", b.degraded},
            {"attempts", b.attempts},
            {"rationale", b.rationale}}}};
}

}  // namespace

json to_json(const ReferenceReport& r) {
  json clips = json::array();
  for (const auto& c : r.clips) {
    json j = {{"clip_index", c.clip_index},
              {"window", {c.window.start, c.window.end}},
              {"sampled", c.window.sampled},
              {"referent_absent", c.referent_absent}};
    if (c.selection) {
      j["selection"] = selection_json(*c.selection);
      j["candidates"] = {{"count", c.candidate_count},
                         {"text_threshold", c.thresholds.text},
                         {"box_threshold", c.thresholds.box},
                         {"halved", c.halved}};
    }
    clips.push_back(std::move(j));
  }
  json j = {{"reference", r.reference.text},
            {"source", r.reference.source == ReferenceSource::rvos_text ? "rvos_text" : "lbru_category"},
            {"frames_per_clip", r.plan.frames_per_clip},
            {"interval", r.plan.interval},
            {"clips", clips},
            {"start_frame", r.start_frame},
            {"all_absent", r.all_absent},
            {"degraded", r.degraded},
            {"warnings", r.warnings}};
  j["start_clip"] = r.start_clip ? json(*r.start_clip) : json(nullptr);
  if (r.reference.category) j["category"] = *r.reference.category;
  return j;
}

json to_json(const AvsResult& r) {
  json tags = json::array();
  for (const auto& t : r.tags.tags) tags.push_back({{"label", t.label}, {"score", t.score}});
  json segments = json::array();
  for (std::size_t i = 0; i < r.segmentation.segments.size(); ++i) {
    const auto& s = r.segmentation.segments[i];
    json seg = {{"start", s.start}, {"end", s.end}};
    if (i < r.assignment.combination.size()) {
      seg["combination"] = r.assignment.combination[i];
      seg["categories"] = r.assignment.categories[i];
    }
    segments.push_back(std::move(seg));
  }
  json refs = json::array();
  for (const auto& ref : r.references) {
    json j = to_json(ref.report);
    std::vector<std::int64_t> silent;
    for (std::size_t f = 0; f < ref.masks.silence_flags.size(); ++f) {
      if (ref.masks.silence_flags[f]) silent.push_back(static_cast<std::int64_t>(f));
    }
    j["silent_frames"] = silent;
    refs.push_back(std::move(j));
  }
  return {{"audio_tags", tags},
          {"categories", r.categories.set.categories},
          {"lbru", {{"degraded", r.categories.degraded},
                    {"attempts", r.categories.attempts},
                    {"warnings", r.categories.warnings}}},
          {"audio_segments", segments},
          {"sed_degraded", r.segmentation.degraded},
          {"embed_degraded", r.assignment.degraded},
          {"no_categories", r.no_categories},
          {"degraded", r.degraded},
          {"references", refs}};
}

}  // namespace alref::orchestrator
