#pragma once

#include <filesystem>
#include <vector>

#include "alref/eval/datasets.hpp"
#include "alref/eval/metrics.hpp"

namespace alref::eval {

/// Prediction root: `<pred>/Annotations` when present, else `<pred>`.
std::filesystem::path prediction_root(const std::filesystem::path& pred_dir);

/// Masks under <root>/<video>/<expression>/<frame>.png; nonzero pixels are
/// foreground. Missing or unreadable frames become empty masks and a warning.
std::vector<BinaryMask> read_prediction(const std::filesystem::path& root, const DatasetSample& sample, int height,
                                        int width, std::vector<std::string>& warnings);

struct ScoreOptions {
  bool group_by_annotator = false;
};

MetricReport score_dataset(const Dataset& dataset, const std::filesystem::path& pred_dir,
                           const ScoreOptions& options = {});

}  // namespace alref::eval
