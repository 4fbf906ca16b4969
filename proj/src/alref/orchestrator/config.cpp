#include "alref/orchestrator/config.hpp"

#include <set>

#include "alref/core/error.hpp"
#include "alref/io/files.hpp"

namespace alref::orchestrator {

namespace {

using nlohmann::json;

const std::set<std::string> kLayouts = {"ref_youtube_vos", "ref_davis17", "mevis", "avsbench"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::config, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(ErrorCode::config, "unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::config, where + "." + key + " has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

const char* to_string(Task t) { return t == Task::avs ? "avs" : "rvos"; }

Task parse_task(const std::string& s) {
  if (s == "rvos") return Task::rvos;
  if (s == "avs") return Task::avs;
  fail(ErrorCode::config, "unknown task '" + s + "' (expected rvos or avs)");
}

gpt_ps::BoxStrategy PipelineConfig::effective_box_strategy() const {
  if (task == Task::avs && box_strategy == gpt_ps::BoxStrategy::gpt) return gpt_ps::BoxStrategy::avs;
  return box_strategy;
}

void PipelineConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::config, m); };
  if (frames_per_clip < 1) bad("pipeline.frames_per_clip must be >= 1");
  if (interval < 1) bad("pipeline.interval must be >= 1");
  if (cells_per_row < 1) bad("pipeline.cells_per_row must be >= 1");
  if (!(thresholds.text > 0 && thresholds.text < 1) || !(thresholds.box > 0 && thresholds.box < 1))
    bad("pipeline thresholds must lie in (0, 1)");
  if (max_candidates < 1) bad("pipeline.max_candidates must be >= 1");
  if (llm_attempts < 1) bad("pipeline.llm_attempts must be >= 1");
  if (top_k < 1) bad("audio.top_k must be >= 1");
  if (avs_frames < 1) bad("audio.frames must be >= 1");
  if (min_segment_seconds < 0) bad("audio.min_segment_seconds must be >= 0");
  if (max_categories < 1 || max_categories > 16) bad("audio.max_categories must be in [1, 16]");
  if (!kLayouts.count(layout)) bad("unknown dataset layout '" + layout + "'");
  if (task == Task::avs && layout != "avsbench") bad("task avs needs the avsbench layout");
  if (task == Task::rvos && layout == "avsbench") bad("task rvos cannot read the avsbench layout");
  if (davis_grouping != "expression" && davis_grouping != "annotator")
    bad("dataset.davis_grouping must be 'expression' or 'annotator'");
  if (default_fps.num <= 0 || default_fps.den <= 0) bad("dataset.fps must be positive");
  if (jobs < 1) bad("jobs must be >= 1");
  if (task == Task::rvos && box_strategy == gpt_ps::BoxStrategy::avs) bad("box strategy 'avs' needs task avs");
}

void PipelineConfig::apply_ablation(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorCode::config, "ablation must look like frame=<s> or box=<s>");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  if (key == "frame") {
    frame_strategy = gpt_ps::parse_frame_strategy(value);
  } else if (key == "box") {
    box_strategy = gpt_ps::parse_box_strategy(value);
  } else {
    fail(ErrorCode::config, "unknown ablation key '" + key + "'");
  }
}

PipelineConfig preset(const std::string& name) {
  PipelineConfig c;
  c.preset = name;
  if (name == "ref_youtube_vos") {
    c.interval = 10;
  } else if (name == "ref_davis17") {
    c.interval = 5;
    c.layout = "ref_davis17";
  } else if (name == "mevis") {
    c.interval = 5;
    c.layout = "mevis";
  } else if (name == "avs_s4" || name == "avs_ms3" || name == "avss") {
    c.task = Task::avs;
    c.layout = "avsbench";
    c.thresholds = gpt_ps::kAvsThresholds;
    c.avs_frames = name == "avss" ? 10 : 5;
    c.interval = 1;
    c.default_fps = {1, 1};
  } else {
    fail(ErrorCode::config, "unknown preset '" + name + "'");
  }
  return c;
}

PipelineConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"preset", "task", "dataset", "pipeline", "audio", "prompts_dir", "cache_dir", "jobs", "dump_prompts"},
             "config");
  std::string preset_name = "ref_youtube_vos";
  read(j, "preset", preset_name, "config");
  PipelineConfig c = preset(preset_name);

  if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d, {"layout", "root", "davis_grouping", "fps"}, "dataset");
    read(d, "layout", c.layout, "dataset");
    std::string root;
    read(d, "root", root, "dataset");
    if (!root.empty()) c.dataset_root = resolve(base_dir, root);
    read(d, "davis_grouping", c.davis_grouping, "dataset");
    if (d.contains("fps")) {
      const json& f = d.at("fps");
      if (f.is_array() && f.size() == 2 && f[0].is_number_integer() && f[1].is_number_integer()) {
        c.default_fps = Rational::reduced(f[0].get<std::int64_t>(), f[1].get<std::int64_t>());
      } else if (f.is_number_integer()) {
        c.default_fps = {f.get<std::int64_t>(), 1};
      } else {
        fail(ErrorCode::config, "dataset.fps must be an integer or [num, den]");
      }
    }
  }

  if (j.contains("pipeline")) {
    const json& p = j.at("pipeline");
    check_keys(p,
               {"frames_per_clip", "interval", "cells_per_row", "frame_labels", "text_threshold", "box_threshold",
                "max_candidates", "llm_attempts", "frame_strategy", "box_strategy"},
               "pipeline");
    read(p, "frames_per_clip", c.frames_per_clip, "pipeline");
    read(p, "interval", c.interval, "pipeline");
    read(p, "cells_per_row", c.cells_per_row, "pipeline");
    read(p, "text_threshold", c.thresholds.text, "pipeline");
    read(p, "box_threshold", c.thresholds.box, "pipeline");
    read(p, "max_candidates", c.max_candidates, "pipeline");
    read(p, "llm_attempts", c.llm_attempts, "pipeline");
    if (p.contains("frame_labels")) {
      const auto mode = p.at("frame_labels").get<std::string>();
      if (mode == "positional") c.label_mode = symbolic::LabelMode::positional;
      else if (mode == "absolute") c.label_mode = symbolic::LabelMode::absolute;
      else fail(ErrorCode::config, "pipeline.frame_labels must be 'positional' or 'absolute'");
    }
    if (p.contains("frame_strategy")) c.apply_ablation("frame=" + p.at("frame_strategy").get<std::string>());
    if (p.contains("box_strategy")) c.apply_ablation("box=" + p.at("box_strategy").get<std::string>());
  }

  if (j.contains("audio")) {
    const json& a = j.at("audio");
    check_keys(a, {"top_k", "frames", "min_segment_seconds", "max_categories"}, "audio");
    read(a, "top_k", c.top_k, "audio");
    read(a, "frames", c.avs_frames, "audio");
    read(a, "min_segment_seconds", c.min_segment_seconds, "audio");
    read(a, "max_categories", c.max_categories, "audio");
  }

  std::string dir;
  read(j, "prompts_dir", dir, "config");
  if (!dir.empty()) c.prompts_dir = resolve(base_dir, dir);
  dir.clear();
  read(j, "cache_dir", dir, "config");
  if (!dir.empty()) c.cache_dir = resolve(base_dir, dir);
  read(j, "jobs", c.jobs, "config");
  read(j, "dump_prompts", c.dump_prompts, "config");
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::config, "cannot parse config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::config, e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const PipelineConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["task"] = to_string(c.task);
  j["dataset"] = {{"layout", c.layout},
                  {"davis_grouping", c.davis_grouping},
                  {"fps", {c.default_fps.num, c.default_fps.den}}};
  j["pipeline"] = {{"frames_per_clip", c.frames_per_clip},
                   {"interval", c.interval},
                   {"cells_per_row", c.cells_per_row},
                   {"frame_labels", c.label_mode == symbolic::LabelMode::positional ? "positional" : "absolute"},
                   {"text_threshold", c.thresholds.text},
                   {"box_threshold", c.thresholds.box},
                   {"max_candidates", c.max_candidates},
                   {"llm_attempts", c.llm_attempts},
                   {"frame_strategy", gpt_ps::to_string(c.frame_strategy)},
                   {"box_strategy", gpt_ps::to_string(c.effective_box_strategy())}};
  j["audio"] = {{"top_k", c.top_k},
                {"frames", c.avs_frames},
                {"min_segment_seconds", c.min_segment_seconds},
                {"max_categories", c.max_categories}};
  if (!c.dataset_root.empty()) j["dataset"]["root"] = c.dataset_root.string();
  if (c.cache_dir) j["cache_dir"] = c.cache_dir->string();
  if (c.prompts_dir) j["prompts_dir"] = c.prompts_dir->string();
  j["jobs"] = c.jobs;
  j["dump_prompts"] = c.dump_prompts;
  return j;
}

}  // namespace alref::orchestrator
