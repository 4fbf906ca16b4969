#include "alref/app/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <mutex>
#include <set>
#include <thread>

#include "alref/core/error.hpp"
#include "alref/eval/scorer.hpp"
#include "alref/io/files.hpp"
#include "alref/io/hash.hpp"
#include "alref/io/png.hpp"
#include "alref/orchestrator/pipeline.hpp"
#include "alref/prompting/audit.hpp"
#include "alref/prompting/llm_channel.hpp"
#include "alref/symbolic/symbolic.hpp"

namespace alref::app {

namespace fs = std::filesystem;
using nlohmann::json;
using orchestrator::PipelineConfig;
using orchestrator::Task;

std::string slug(const std::string& text) {
  std::string out;
  for (unsigned char c : text) out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  return out;
}

std::string audit_file_name(const std::string& video_id, const std::string& expression_id) {
  return video_id + "_" + expression_id + ".jsonl";
}

namespace {

prompting::PromptLibrary prompt_library(const PipelineConfig& config) {
  auto lib = prompting::PromptLibrary::builtin();
  if (config.prompts_dir) lib.load_overrides(*config.prompts_dir);
  return lib;
}

eval::Dataset open_dataset(const PipelineConfig& config, bool verify) {
  eval::DatasetOptions options;
  options.default_fps = config.default_fps;
  options.verify_images = verify;
  return eval::load_dataset(eval::parse_layout(config.layout), config.dataset_root, options);
}

void write_masks(const fs::path& dir, const eval::DatasetSample& sample, const std::vector<BinaryMask>& masks) {
  fs::create_directories(dir);
  for (std::size_t f = 0; f < masks.size(); ++f) {
    io::write_bytes(dir / (sample.frame_names[f] + ".png"), io::encode_mask_png(masks[f]));
  }
}

json calls_json(const backends::CallCounters& c) {
  return {{"chat", c.chat.load()},
          {"ground", c.ground.load()},
          {"segment_open", c.segment_open.load()},
          {"segment_prompt", c.segment_prompt.load()},
          {"segment_propagate", c.segment_propagate.load()},
          {"audio_tag", c.audio_tag.load()},
          {"embed_audio", c.embed_audio.load()},
          {"embed_text", c.embed_text.load()},
          {"sed", c.sed.load()}};
}

class PromptDumper {
 public:
  explicit PromptDumper(fs::path dir) : dir_(std::move(dir)) {}

  void operator()(const std::string& hash, const Raster& image) {
    std::lock_guard lock(mutex_);
    if (!written_.insert(hash).second) return;
    const fs::path p = dir_ / (hash + ".png");
    if (fs::exists(p)) return;
    fs::create_directories(dir_);
    io::write_bytes(p, io::encode_png(image));
  }

 private:
  fs::path dir_;
  std::mutex mutex_;
  std::set<std::string> written_;
};

struct RunShared {
  const PipelineConfig& config;
  const eval::Dataset& dataset;
  const backends::BackendProvider& provider;
  const prompting::PromptLibrary& prompts;
  prompting::ReplyCache* disk_cache;
  PromptDumper* dumper;
  fs::path out_dir;
};

SampleOutcome run_sample(const RunShared& shared, const eval::DatasetSample& sample) {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig& cfg = shared.config;
  const bool avs = cfg.task == Task::avs;
  SampleOutcome out;
  out.key = sample.key();
  auto counters = std::make_shared<backends::CallCounters>();
  json result;
  try {
    auto clip = std::make_shared<const VideoClip>(eval::load_video(sample));
    std::shared_ptr<const AudioClip> audio;
    if (avs) audio = std::make_shared<const AudioClip>(eval::load_audio(sample));

    std::shared_ptr<const backends::OracleTruth> truth;
    if (shared.provider.needs_truth()) {
      auto gt = eval::load_ground_truth(shared.dataset, sample, clip->height(), clip->width());
      truth = std::make_shared<const backends::OracleTruth>(backends::OracleTruth{clip, audio, std::move(gt.objects)});
    }
    const auto backends = backends::guarded(shared.provider.for_sample(sample.key(), truth), counters);

    prompting::AuditLog audit(shared.out_dir / "audit" / audit_file_name(sample.video_id, sample.expression_id));
    audit.record({{"event", "sample"},
                  {"video_id", sample.video_id},
                  {"expression_id", sample.expression_id},
                  {"expression", sample.expression},
                  {"task", orchestrator::to_string(cfg.task)},
                  {"frames", clip->size()},
                  {"width", clip->width()},
                  {"height", clip->height()},
                  {"fps", {clip->fps().num, clip->fps().den}}});

    // Without a cache directory, replies are only reused within the sample.
    prompting::ReplyCache memory_cache;
    prompting::ReplyCache* cache = shared.disk_cache ? shared.disk_cache : &memory_cache;
    prompting::ImageDump dump;
    if (shared.dumper) dump = [d = shared.dumper](const std::string& h, const Raster& r) { (*d)(h, r); };
    prompting::LlmChannel llm(*backends.chat, shared.prompts, &audit, cache, cfg.llm_attempts, dump);
    orchestrator::PipelineContext ctx{cfg, backends, llm, &audit};

    const fs::path ann = shared.out_dir / "Annotations" / sample.video_id;
    if (!avs) {
      auto ref = orchestrator::run_reference(*clip, Reference::from_text(sample.expression), ctx);
      write_masks(ann / sample.expression_id, sample, ref.masks.masks);
      result = orchestrator::to_json(ref.report);
      out.degraded = ref.report.degraded;
    } else {
      auto r = orchestrator::run_avs_video(*clip, *audio, ctx);
      write_masks(ann / sample.expression_id, sample, orchestrator::union_masks(*clip, r.references));
      for (const auto& ref : r.references) {
        write_masks(ann / (sample.expression_id + "_" + slug(ref.report.reference.category.value_or(""))), sample,
                    ref.masks.masks);
      }
      result = orchestrator::to_json(r);
      out.degraded = r.degraded;
    }
    audit.record({{"event", "done"}, {"degraded", out.degraded}});
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
    out.report["error"] = {{"type", to_string(e.code())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    out.error = e.what();
    out.report["error"] = {{"type", "internal"}, {"message", e.what()}};
  }
  out.report["key"] = out.key;
  out.report["video_id"] = sample.video_id;
  out.report["expression_id"] = sample.expression_id;
  out.report["status"] = out.ok ? (out.degraded ? "degraded" : "ok") : "failed";
  out.report["calls"] = calls_json(*counters);
  if (out.ok) out.report["result"] = std::move(result);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

Engine::Engine(PipelineConfig config, backends::BackendConfig backends)
    : config_(std::move(config)), backends_(std::move(backends)) {}

Engine engine_from_files(const fs::path& config_path, const fs::path& backends_path) {
  return Engine(orchestrator::load_config(config_path), backends::load_backend_config(backends_path));
}

json Engine::validate() const {
  config_.validate();
  const bool avs = config_.task == Task::avs;
  backends::require_endpoints(backends_, backends::required_kinds(avs));
  backends::BackendProvider provider(backends_);
  (void)prompt_library(config_);
  const auto dataset = open_dataset(config_, true);
  if (avs && dataset.layout != eval::DatasetLayout::avsbench) fail(ErrorCode::config, "task avs needs the avsbench layout");
  if (!avs && dataset.layout == eval::DatasetLayout::avsbench) fail(ErrorCode::config, "task rvos cannot use the avsbench layout");
  std::size_t frames = 0;
  for (const auto& s : dataset.samples) frames += s.frame_names.size();
  return {{"task", orchestrator::to_string(config_.task)},
          {"layout", eval::to_string(dataset.layout)},
          {"samples", dataset.samples.size()},
          {"frames", frames},
          {"skipped", dataset.skipped},
          {"warnings", dataset.warnings},
          {"needs_ground_truth", provider.needs_truth()}};
}

RunSummary Engine::run(const fs::path& out_dir) const {
  config_.validate();
  const bool avs = config_.task == Task::avs;
  backends::require_endpoints(backends_, backends::required_kinds(avs));
  const backends::BackendProvider provider(backends_);
  const auto prompts = prompt_library(config_);
  const auto dataset = open_dataset(config_, false);
  if (avs != (dataset.layout == eval::DatasetLayout::avsbench))
    fail(ErrorCode::config, std::string("task ") + orchestrator::to_string(config_.task) + " does not match layout " +
                                eval::to_string(dataset.layout));

  fs::create_directories(out_dir);
  std::optional<prompting::ReplyCache> disk_cache;
  if (config_.cache_dir) disk_cache.emplace(*config_.cache_dir);
  std::optional<PromptDumper> dumper;
  if (config_.dump_prompts) dumper.emplace(out_dir / "prompts");

  const RunShared shared{config_,  dataset, provider, prompts, disk_cache ? &*disk_cache : nullptr,
                         dumper ? &*dumper : nullptr, out_dir};

  RunSummary summary;
  summary.samples.resize(dataset.samples.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < dataset.samples.size(); i = next++) {
      summary.samples[i] = run_sample(shared, dataset.samples[i]);
    }
  };
  const int jobs = std::max(1, std::min<int>(config_.jobs, static_cast<int>(dataset.samples.size())));
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  json samples = json::array();
  json timings = json::object();
  double total = 0.0;
  for (const auto& s : summary.samples) {
    if (!s.ok) ++summary.failed;
    if (s.ok && s.degraded) ++summary.degraded;
    samples.push_back(s.report);
    timings[s.key] = s.seconds;
    total += s.seconds;
  }
  // Job count lives with the timings so reports match across it.
  json config = orchestrator::to_json(config_);
  config.erase("jobs");
  summary.report = {{"config", config},
                    {"dataset",
                     {{"layout", eval::to_string(dataset.layout)},
                      {"samples", dataset.samples.size()},
                      {"skipped", dataset.skipped},
                      {"warnings", dataset.warnings}}},
                    {"samples", samples},
                    {"summary",
                     {{"total", summary.samples.size()},
                      {"ok", summary.samples.size() - summary.failed},
                      {"degraded", summary.degraded},
                      {"failed", summary.failed}}}};
  io::write_text(out_dir / "run_report.json", summary.report.dump(2) + "\n");
  io::write_text(out_dir / "timings.json", json{{"samples", timings}, {"total_seconds", total}, {"jobs", config_.jobs}}.dump(2) + "\n");
  return summary;
}

namespace {

BoundingBox box_from_json(const json& j) {
  BoundingBox b;
  b.x_min = j.at("x_min").get<int>();
  b.y_min = j.at("y_min").get<int>();
  b.x_max = j.at("x_max").get<int>();
  b.y_max = j.at("y_max").get<int>();
  b.score = j.value("score", 0.0);
  b.label = j.value("label", "");
  return b;
}

// Recomposes prompt images from the video while walking the log.
class ImageReplayer {
 public:
  ImageReplayer(std::shared_ptr<const VideoClip> clip, symbolic::GridOptions options, fs::path dir)
      : clip_(std::move(clip)), options_(options), dir_(std::move(dir)) {}

  void observe(const json& e) {
    const std::string kind = e.value("event", "");
    if (kind == "clip" || kind == "lbru_grid") {
      sampled_ = e.at("sampled").get<std::vector<std::int64_t>>();
      keep(symbolic::compose_grid(*clip_, sampled_, options_).pixels);
    } else if (kind == "candidates") {
      std::vector<BoundingBox> boxes;
      for (const auto& b : e.at("boxes")) boxes.push_back(box_from_json(b));
      if (boxes.empty()) return;
      const auto marked = symbolic::paint_boxes(clip_->frame(e.at("frame_index").get<std::int64_t>()), boxes);
      keep(marked.pixels);
      keep(symbolic::compose_pivot_context(marked, *clip_, sampled_, options_).pixels);
    }
  }

  bool known(const std::string& hash) const { return rendered_.count(hash) != 0; }

 private:
  void keep(const Raster& image) {
    const auto h = io::raster_hash(image);
    if (!rendered_.insert(h).second) return;
    io::write_bytes(dir_ / (h + ".png"), io::encode_png(image));
  }

  std::shared_ptr<const VideoClip> clip_;
  symbolic::GridOptions options_;
  fs::path dir_;
  std::vector<std::int64_t> sampled_;
  std::set<std::string> rendered_;
};

std::string seq_name(long long seq) {
  std::string s = std::to_string(seq);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

json replay(const fs::path& audit_log, const fs::path& out_dir, const PipelineConfig* config) {
  const auto events = prompting::read_audit_log(audit_log);
  if (events.empty() || events.front().value("event", "") != "sample")
    fail(ErrorCode::io, audit_log.string() + ": not an audit log (first event must be \"sample\")");
  const json& head = events.front();
  fs::create_directories(out_dir);

  const auto prompts = config ? prompt_library(*config) : prompting::PromptLibrary::builtin();
  std::optional<ImageReplayer> images;
  if (config) {
    const auto dataset = open_dataset(*config, false);
    const std::string key = head.at("video_id").get<std::string>() + "/" + head.at("expression_id").get<std::string>();
    const auto it = std::find_if(dataset.samples.begin(), dataset.samples.end(),
                                 [&](const eval::DatasetSample& s) { return s.key() == key; });
    if (it == dataset.samples.end()) fail(ErrorCode::io, "sample " + key + " not found in the dataset");
    fs::create_directories(out_dir / "images");
    images.emplace(std::make_shared<const VideoClip>(eval::load_video(*it)),
                   symbolic::GridOptions{config->cells_per_row, config->label_mode}, out_dir / "images");
  }

  json calls = json::array();
  std::size_t prompt_matches = 0;
  std::size_t image_checks = 0;
  std::size_t image_matches = 0;
  for (const auto& e : events) {
    if (images) images->observe(e);
    if (e.value("event", "") != "llm_call") continue;
    const std::string name = e.at("template").get<std::string>();
    const auto vars = e.at("vars").get<prompting::TemplateVars>();
    std::string rendered;
    std::string problem;
    try {
      rendered = prompts.render(name, vars);
    } catch (const Error& err) {
      problem = err.what();
    }
    const bool same_prompt = problem.empty() && rendered == e.at("prompt").get<std::string>();
    if (same_prompt) ++prompt_matches;
    const long long seq = e.value("seq", 0LL);
    io::write_text(out_dir / (seq_name(seq) + "_" + name + ".txt"), rendered);

    json entry = {{"seq", seq},
                  {"template", name},
                  {"attempt", e.value("attempt", 1)},
                  {"prompt_matches", same_prompt},
                  {"template_version_logged", e.value("template_version", 0)}};
    if (prompts.contains(name)) entry["template_version_now"] = prompts.get(name).version;
    if (!problem.empty()) entry["error"] = problem;
    if (images) {
      json per_image = json::array();
      for (const auto& h : e.at("images")) {
        const bool ok = images->known(h.get<std::string>());
        ++image_checks;
        if (ok) ++image_matches;
        per_image.push_back({{"hash", h}, {"reproduced", ok}});
      }
      entry["images"] = per_image;
    }
    calls.push_back(std::move(entry));
  }

  json summary = {{"audit_log", audit_log.string()},
                  {"video_id", head.at("video_id")},
                  {"expression_id", head.at("expression_id")},
                  {"llm_calls", calls.size()},
                  {"prompts_matched", prompt_matches},
                  {"calls", calls}};
  if (images) {
    summary["images_checked"] = image_checks;
    summary["images_matched"] = image_matches;
  }
  io::write_text(out_dir / "replay.json", summary.dump(2) + "\n");
  return summary;
}

eval::MetricReport score(const ScoreRequest& request) {
  eval::DatasetOptions options;
  options.default_fps = request.fps;
  const auto dataset = eval::load_dataset(request.layout, request.dataset_root, options);
  return eval::score_dataset(dataset, request.pred_dir, {request.group_by_annotator});
}

}  // namespace alref::app
