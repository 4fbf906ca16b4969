#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "alref/gpt_ps/gpt_ps.hpp"
#include "alref/symbolic/symbolic.hpp"

namespace alref::orchestrator {

enum class Task { rvos, avs };

const char* to_string(Task t);
Task parse_task(const std::string& s);

struct PipelineConfig {
  Task task = Task::rvos;
  std::string preset = "ref_youtube_vos";

  // clip division
  int frames_per_clip = 5;
  int interval = 10;
  int cells_per_row = 5;
  symbolic::LabelMode label_mode = symbolic::LabelMode::positional;

  // pivot selection
  gpt_ps::Thresholds thresholds = gpt_ps::kRvosThresholds;
  int max_candidates = gpt_ps::kMaxCandidates;
  int llm_attempts = 3;
  gpt_ps::FrameStrategy frame_strategy = gpt_ps::FrameStrategy::gpt;
  gpt_ps::BoxStrategy box_strategy = gpt_ps::BoxStrategy::gpt;

  // audio
  int top_k = 5;
  int avs_frames = 5;
  double min_segment_seconds = 0.5;
  int max_categories = 6;

  // dataset
  std::string layout = "ref_youtube_vos";
  std::filesystem::path dataset_root;
  std::string davis_grouping = "expression";
  Rational default_fps{30, 1};

  std::optional<std::filesystem::path> prompts_dir;
  std::optional<std::filesystem::path> cache_dir;

  int jobs = 1;
  bool dump_prompts = false;

  /// Box strategy actually used: plain `gpt` becomes the AVS variant on AVS runs.
  gpt_ps::BoxStrategy effective_box_strategy() const;

  /// Throws ErrorCode::config on inconsistent values.
  void validate() const;

  /// Applies "frame=<s>" or "box=<s>".
  void apply_ablation(const std::string& assignment);
};

/// Defaults for ref_youtube_vos, ref_davis17, mevis, avs_s4, avs_ms3, avss.
PipelineConfig preset(const std::string& name);

// {"preset": ..., "task": ..., "dataset": {...}, "pipeline": {...},
//  "audio": {...}, "prompts_dir": ..., "cache_dir": ...}. Relative paths
// resolve against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const PipelineConfig& c);

}  // namespace alref::orchestrator
