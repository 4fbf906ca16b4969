// alref: command-line front end over the C API.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "alref/alref.h"

namespace {

int exit_code(alref_status s) {
  if (s == ALREF_OK) return 0;
  if (s == ALREF_ERR_CONFIG || s == ALREF_ERR_INVALID_ARGUMENT) return 2;
  return 1;
}

int report_failure(const char* what, alref_status s) {
  std::cerr << "alref " << what << ": " << alref_status_name(s) << ": " << alref_last_error() << "\n";
  return exit_code(s);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  alref_string_free(s);
  return out;
}

struct EngineHandle {
  alref_engine* ptr = nullptr;
  ~EngineHandle() { alref_engine_destroy(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free referring and audio-visual segmentation"};
  app.set_version_flag("--version", std::string(alref_version()));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Segment every sample of a dataset");
  std::string config_path, backends_path, out_dir, task;
  int jobs = 0;
  std::vector<std::string> ablations;
  bool dump_prompts = false, dry_run = false;
  run->add_option("--config", config_path, "Pipeline config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--backends", backends_path, "Backend endpoints JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--task", task, "rvos or avs (must agree with the dataset)")->check(CLI::IsMember({"rvos", "avs"}));
  run->add_option("--jobs", jobs, "Samples processed concurrently")->check(CLI::Range(1, 1024));
  run->add_option("--ablation", ablations, "frame=gpt|first|middle|last or box=gpt|describe|nodesc|topscore|avs");
  run->add_flag("--dump-prompts", dump_prompts, "Write every prompt image under <out>/prompts");
  run->add_flag("--dry-run", dry_run, "Validate config and dataset without calling backends");

  auto* score = app.add_subcommand("score", "Score predicted masks against ground truth");
  std::string layout = "ref_youtube_vos", pred_dir, dataset_root, json_out, csv_out;
  bool by_annotator = false;
  score->add_option("--layout", layout, "ref_youtube_vos, ref_davis17, mevis or avsbench");
  score->add_option("--pred", pred_dir, "Prediction directory")->required()->check(CLI::ExistingDirectory);
  score->add_option("--dataset", dataset_root, "Dataset root")->required()->check(CLI::ExistingDirectory);
  score->add_flag("--group-by-annotator", by_annotator, "Average per annotator first, then across annotators");
  score->add_option("--json", json_out, "Write the full report here");
  score->add_option("--csv", csv_out, "Write the one-row summary here");

  auto* replay = app.add_subcommand("replay", "Re-render the prompts recorded in an audit log");
  std::string audit_log, replay_out, replay_config;
  replay->add_option("--audit", audit_log, "Audit log (.jsonl)")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "Output directory")->required();
  replay->add_option("--config", replay_config, "Pipeline config; enables image reconstruction")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*run) {
    if (!dry_run && out_dir.empty()) {
      std::cerr << "alref run: --out is required unless --dry-run is given\n";
      return 2;
    }
    EngineHandle engine;
    if (auto s = alref_engine_create(config_path.c_str(), backends_path.c_str(), &engine.ptr); s != ALREF_OK)
      return report_failure("run", s);
    auto set = [&](const char* key, const std::string& value) {
      return alref_engine_set(engine.ptr, key, value.c_str());
    };
    if (!task.empty())
      if (auto s = set("task", task); s != ALREF_OK) return report_failure("run", s);
    if (jobs > 0)
      if (auto s = set("jobs", std::to_string(jobs)); s != ALREF_OK) return report_failure("run", s);
    if (dump_prompts)
      if (auto s = set("dump_prompts", "true"); s != ALREF_OK) return report_failure("run", s);
    for (const auto& a : ablations)
      if (auto s = set("ablation", a); s != ALREF_OK) return report_failure("run", s);

    if (dry_run) {
      char* summary = nullptr;
      if (auto s = alref_engine_validate(engine.ptr, &summary); s != ALREF_OK) return report_failure("run", s);
      std::cout << nlohmann::json::parse(take(summary)).dump(2) << "\n";
      return 0;
    }

    std::size_t failed = 0;
    char* report = nullptr;
    if (auto s = alref_engine_run(engine.ptr, out_dir.c_str(), &failed, &report); s != ALREF_OK)
      return report_failure("run", s);
    const auto j = nlohmann::json::parse(take(report));
    const auto& sum = j.at("summary");
    std::cout << "samples " << sum.at("total") << ", ok " << sum.at("ok") << ", degraded " << sum.at("degraded")
              << ", failed " << sum.at("failed") << "\n";
    for (const auto& s : j.at("samples")) {
      if (s.at("status") == "failed") {
        std::cerr << "  " << s.at("key").get<std::string>() << ": " << s.at("error").at("type").get<std::string>()
                  << ": " << s.at("error").at("message").get<std::string>() << "\n";
      }
    }
    std::cout << "report: " << out_dir << "/run_report.json\n";
    return failed == 0 ? 0 : 1;
  }

  if (*score) {
    char* report = nullptr;
    const auto s = alref_score(layout.c_str(), pred_dir.c_str(), dataset_root.c_str(), by_annotator ? 1 : 0,
                               json_out.empty() ? nullptr : json_out.c_str(),
                               csv_out.empty() ? nullptr : csv_out.c_str(), &report);
    if (s != ALREF_OK) return report_failure("score", s);
    const auto j = nlohmann::json::parse(take(report));
    for (const auto& w : j.value("warnings", nlohmann::json::array())) std::cerr << "warning: " << w.get<std::string>() << "\n";
    if (j.value("avs", false)) {
      std::printf("M_J %.1f  M_F %.1f\n", 100.0 * j.at("M_J").get<double>(), 100.0 * j.at("M_F").get<double>());
    } else {
      std::printf("J&F %.1f  J %.1f  F %.1f\n", 100.0 * j.at("J&F").get<double>(), 100.0 * j.at("J").get<double>(),
                  100.0 * j.at("F").get<double>());
    }
    return 0;
  }

  if (*replay) {
    char* summary = nullptr;
    const auto s = alref_replay(audit_log.c_str(), replay_out.c_str(),
                                replay_config.empty() ? nullptr : replay_config.c_str(), &summary);
    if (s != ALREF_OK) return report_failure("replay", s);
    const auto j = nlohmann::json::parse(take(summary));
    std::cout << "llm calls " << j.at("llm_calls") << ", prompts matched " << j.at("prompts_matched");
    if (j.contains("images_checked"))
      std::cout << ", images matched " << j.at("images_matched") << "/" << j.at("images_checked");
    std::cout << "\n";
    const bool all = j.at("prompts_matched") == j.at("llm_calls") &&
                     (!j.contains("images_checked") || j.at("images_matched") == j.at("images_checked"));
    return all ? 0 : 1;
  }
  return 0;
}
