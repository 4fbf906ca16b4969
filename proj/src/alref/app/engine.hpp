#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alref/backends/factory.hpp"
#include "alref/eval/datasets.hpp"
#include "alref/eval/metrics.hpp"
#include "alref/orchestrator/config.hpp"

namespace alref::app {

struct SampleOutcome {
  std::string key;
  bool ok = false;
  bool degraded = false;
  std::string error;
  nlohmann::json report;
  double seconds = 0.0;
};

struct RunSummary {
  std::vector<SampleOutcome> samples;
  std::size_t failed = 0;
  std::size_t degraded = 0;
  nlohmann::json report;  // contents of run_report.json
};

// A configured pipeline over one dataset. Writes, under the output directory:
//   Annotations/<video>/<expression>/<frame>.png   predicted masks
//   audit/<video>_<expression>.jsonl               prompts, replies, decisions
//   run_report.json                                deterministic run record
//   timings.json                                   wall-clock per sample
//   prompts/<hash>.png                             prompt images (dump_prompts)
class Engine {
 public:
  Engine(orchestrator::PipelineConfig config, backends::BackendConfig backends);

  orchestrator::PipelineConfig& config() { return config_; }
  const orchestrator::PipelineConfig& config() const { return config_; }
  const backends::BackendConfig& backend_config() const { return backends_; }

  /// Checks config, endpoints and dataset (decoding every image) without
  /// calling any backend. Throws on config errors; returns a summary.
  nlohmann::json validate() const;

  RunSummary run(const std::filesystem::path& out_dir) const;

 private:
  orchestrator::PipelineConfig config_;
  backends::BackendConfig backends_;
};

Engine engine_from_files(const std::filesystem::path& config_path, const std::filesystem::path& backends_path);

/// Lowercase, non-alphanumerics replaced by '_'.
std::string slug(const std::string& text);

std::string audit_file_name(const std::string& video_id, const std::string& expression_id);

// Re-renders every prompt in an audit log with the current templates and,
// when `config` names the dataset, recomposes the prompt images from the
// video. Writes text and PNG files into out_dir and returns a summary that
// reports which prompts and image hashes still match the log.
nlohmann::json replay(const std::filesystem::path& audit_log, const std::filesystem::path& out_dir,
                      const orchestrator::PipelineConfig* config = nullptr);

struct ScoreRequest {
  eval::DatasetLayout layout = eval::DatasetLayout::ref_youtube_vos;
  std::filesystem::path dataset_root;
  std::filesystem::path pred_dir;
  bool group_by_annotator = false;
  Rational fps{30, 1};
};

eval::MetricReport score(const ScoreRequest& request);

}  // namespace alref::app
