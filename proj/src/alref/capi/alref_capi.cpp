#include "alref/alref.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "alref/app/engine.hpp"
#include "alref/core/error.hpp"
#include "alref/eval/metrics.hpp"
#include "alref/io/files.hpp"
#include "alref/orchestrator/clip_plan.hpp"

using nlohmann::json;

struct alref_engine {
  std::unique_ptr<alref::app::Engine> engine;
};

namespace {

thread_local std::string g_last_error;

alref_status status_of(alref::ErrorCode code) {
  switch (code) {
    case alref::ErrorCode::invalid_argument: return ALREF_ERR_INVALID_ARGUMENT;
    case alref::ErrorCode::config: return ALREF_ERR_CONFIG;
    case alref::ErrorCode::io: return ALREF_ERR_IO;
    case alref::ErrorCode::backend: return ALREF_ERR_BACKEND;
    case alref::ErrorCode::protocol: return ALREF_ERR_PROTOCOL;
    case alref::ErrorCode::timeout: return ALREF_ERR_TIMEOUT;
    case alref::ErrorCode::referent_absent: return ALREF_ERR_REFERENT_ABSENT;
    case alref::ErrorCode::scenario: return ALREF_ERR_SCENARIO;
  }
  return ALREF_ERR_INTERNAL;
}

template <class F>
alref_status guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return ALREF_OK;
  } catch (const alref::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return ALREF_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ALREF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return ALREF_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const json& j) {
  if (out) *out = dup_string(j.dump());
}

void need(const void* p, const char* what) {
  if (!p) alref::fail(alref::ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

alref::app::Engine& engine_of(alref_engine* e) {
  need(e, "engine");
  return *e->engine;
}

}  // namespace

extern "C" {

const char* alref_version(void) { return ALREF_VERSION_STRING; }

const char* alref_status_name(alref_status status) {
  switch (status) {
    case ALREF_OK: return "ok";
    case ALREF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ALREF_ERR_CONFIG: return "config";
    case ALREF_ERR_IO: return "io";
    case ALREF_ERR_BACKEND: return "backend";
    case ALREF_ERR_PROTOCOL: return "protocol";
    case ALREF_ERR_TIMEOUT: return "timeout";
    case ALREF_ERR_REFERENT_ABSENT: return "referent_absent";
    case ALREF_ERR_SCENARIO: return "scenario";
    case ALREF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* alref_last_error(void) { return g_last_error.c_str(); }

void alref_string_free(char* s) { std::free(s); }

alref_status alref_engine_create(const char* config_path, const char* backends_path, alref_engine** out) {
  return guard([&] {
    need(config_path, "config_path");
    need(backends_path, "backends_path");
    need(out, "out");
    *out = nullptr;
    auto engine = std::make_unique<alref::app::Engine>(alref::app::engine_from_files(config_path, backends_path));
    *out = new alref_engine{std::move(engine)};
  });
}

alref_status alref_engine_create_from_json(const char* config_json, const char* backends_json, const char* base_dir,
                                           alref_engine** out) {
  return guard([&] {
    need(config_json, "config_json");
    need(backends_json, "backends_json");
    need(out, "out");
    *out = nullptr;
    const std::filesystem::path base = base_dir ? base_dir : "";
    auto config = alref::orchestrator::config_from_json(json::parse(config_json), base);
    auto backends = alref::backends::parse_backend_config(json::parse(backends_json), base);
    *out = new alref_engine{std::make_unique<alref::app::Engine>(std::move(config), std::move(backends))};
  });
}

void alref_engine_destroy(alref_engine* engine) { delete engine; }

alref_status alref_engine_set(alref_engine* engine, const char* key, const char* value) {
  return guard([&] {
    auto& cfg = engine_of(engine).config();
    need(key, "key");
    need(value, "value");
    const std::string k = key;
    const std::string v = value;
    if (k == "task") {
      cfg.task = alref::orchestrator::parse_task(v);
    } else if (k == "jobs") {
      char* end = nullptr;
      const long n = std::strtol(v.c_str(), &end, 10);
      if (v.empty() || *end != '\0' || n < 1 || n > 1024) alref::fail(alref::ErrorCode::config, "jobs must be 1..1024");
      cfg.jobs = static_cast<int>(n);
    } else if (k == "dump_prompts") {
      if (v != "0" && v != "1" && v != "true" && v != "false")
        alref::fail(alref::ErrorCode::config, "dump_prompts must be true or false");
      cfg.dump_prompts = v == "1" || v == "true";
    } else if (k == "ablation") {
      cfg.apply_ablation(v);
    } else if (k == "dataset_root") {
      cfg.dataset_root = v;
    } else if (k == "cache_dir") {
      cfg.cache_dir = v;
    } else if (k == "prompts_dir") {
      cfg.prompts_dir = v;
    } else {
      alref::fail(alref::ErrorCode::config, "unknown engine setting '" + k + "'");
    }
  });
}

alref_status alref_engine_config_json(const alref_engine* engine, char** out_json) {
  return guard([&] {
    need(engine, "engine");
    emit(out_json, alref::orchestrator::to_json(engine->engine->config()));
  });
}

alref_status alref_engine_validate(alref_engine* engine, char** out_json) {
  return guard([&] { emit(out_json, engine_of(engine).validate()); });
}

alref_status alref_engine_run(alref_engine* engine, const char* out_dir, size_t* out_failed, char** out_report_json) {
  return guard([&] {
    need(out_dir, "out_dir");
    const auto summary = engine_of(engine).run(out_dir);
    if (out_failed) *out_failed = summary.failed;
    emit(out_report_json, summary.report);
  });
}

alref_status alref_score(const char* layout, const char* pred_dir, const char* dataset_root, int group_by_annotator,
                         const char* out_json_path, const char* out_csv_path, char** out_report_json) {
  return guard([&] {
    need(layout, "layout");
    need(pred_dir, "pred_dir");
    need(dataset_root, "dataset_root");
    alref::app::ScoreRequest request;
    request.layout = alref::eval::parse_layout(layout);
    request.pred_dir = pred_dir;
    request.dataset_root = dataset_root;
    request.group_by_annotator = group_by_annotator != 0;
    const auto report = alref::app::score(request);
    const json j = alref::eval::to_json(report);
    if (out_json_path) alref::io::write_text(out_json_path, j.dump(2) + "\n");
    if (out_csv_path) alref::io::write_text(out_csv_path, alref::eval::to_csv(report));
    emit(out_report_json, j);
  });
}

alref_status alref_replay(const char* audit_log, const char* out_dir, const char* config_path, char** out_summary_json) {
  return guard([&] {
    need(audit_log, "audit_log");
    need(out_dir, "out_dir");
    std::optional<alref::orchestrator::PipelineConfig> config;
    if (config_path) config = alref::orchestrator::load_config(config_path);
    emit(out_summary_json, alref::app::replay(audit_log, out_dir, config ? &*config : nullptr));
  });
}

alref_status alref_plan_clips(int64_t frame_count, int frames_per_clip, int interval, char** out_json) {
  return guard([&] {
    need(out_json, "out_json");
    const auto plan = alref::orchestrator::plan_clips(frame_count, frames_per_clip, interval);
    json clips = json::array();
    for (const auto& c : plan.clips) clips.push_back({{"start", c.start}, {"end", c.end}, {"sampled", c.sampled}});
    emit(out_json, {{"frames_per_clip", plan.frames_per_clip},
                    {"interval", plan.interval},
                    {"middle_clip", alref::orchestrator::middle_clip_index(plan.clips.size())},
                    {"clips", clips}});
  });
}

alref_status alref_mask_metrics(const uint8_t* pred, const uint8_t* gt, int height, int width, double* out_j,
                                double* out_f) {
  return guard([&] {
    need(pred, "pred");
    need(gt, "gt");
    if (height <= 0 || width <= 0) alref::fail(alref::ErrorCode::invalid_argument, "mask size must be positive");
    alref::BinaryMask p(height, width);
    alref::BinaryMask g(height, width);
    for (std::size_t i = 0; i < p.bits.size(); ++i) {
      p.bits[i] = pred[i] != 0;
      g.bits[i] = gt[i] != 0;
    }
    if (out_j) *out_j = alref::mask_iou(p, g);
    if (out_f) *out_f = alref::eval::boundary_f(p, g).f;
  });
}

}  // extern "C"
