#include "alref/eval/scorer.hpp"

#include "alref/core/error.hpp"
#include "alref/io/files.hpp"
#include "alref/io/jpeg.hpp"
#include "alref/io/png.hpp"

namespace alref::eval {

namespace fs = std::filesystem;

fs::path prediction_root(const fs::path& pred_dir) {
  if (fs::is_directory(pred_dir / "Annotations")) return pred_dir / "Annotations";
  return pred_dir;
}

std::vector<BinaryMask> read_prediction(const fs::path& root, const DatasetSample& sample, int height, int width,
                                        std::vector<std::string>& warnings) {
  std::vector<BinaryMask> out;
  const fs::path dir = root / sample.video_id / sample.expression_id;
  std::size_t missing = 0;
  for (const auto& name : sample.frame_names) {
    BinaryMask m(height, width);
    const fs::path p = dir / (name + ".png");
    if (!fs::is_regular_file(p)) {
      ++missing;
      out.push_back(std::move(m));
      continue;
    }
    try {
      const auto plane = io::decode_png_labels(io::read_bytes(p));
      if (plane.width != width || plane.height != height) {
        warnings.push_back(sample.key() + ": prediction " + p.filename().string() + " has the wrong size; scored as empty");
      } else {
        for (std::size_t i = 0; i < plane.labels.size(); ++i) m.bits[i] = plane.labels[i] != 0;
      }
    } catch (const Error&) {
      warnings.push_back(sample.key() + ": unreadable prediction " + p.filename().string() + "; scored as empty");
    }
    out.push_back(std::move(m));
  }
  if (missing == sample.frame_names.size()) {
    warnings.push_back(sample.key() + ": no prediction found; scored as empty");
  } else if (missing > 0) {
    warnings.push_back(sample.key() + ": " + std::to_string(missing) + " predicted frames missing; scored as empty");
  }
  return out;
}

MetricReport score_dataset(const Dataset& dataset, const fs::path& pred_dir, const ScoreOptions& options) {
  MetricReport report;
  report.dataset = to_string(dataset.layout);
  report.avs = dataset.layout == DatasetLayout::avsbench;
  report.warnings = dataset.warnings;
  const fs::path root = prediction_root(pred_dir);
  if (!fs::is_directory(root)) fail(ErrorCode::io, "prediction directory " + pred_dir.string() + " does not exist");

  for (const auto& sample : dataset.samples) {
    if (!sample.has_ground_truth()) {
      report.warnings.push_back(sample.key() + ": no ground truth; not scored");
      continue;
    }
    try {
      const Raster first = io::decode_image(io::read_bytes(sample.frame_paths.front()));
      const auto gt = load_ground_truth(dataset, sample, first.height, first.width);
      const auto pred = read_prediction(root, sample, first.height, first.width, report.warnings);
      ObjectScore s;
      s.video_id = sample.video_id;
      s.expression_id = sample.expression_id;
      if (options.group_by_annotator) s.group = sample.annotator.empty() ? "-" : sample.annotator;
      s.j = region_j(pred, gt.masks, gt.annotated);
      s.f = contour_f(pred, gt.masks, gt.annotated);
      s.frames = static_cast<std::size_t>(std::count(gt.annotated.begin(), gt.annotated.end(), true));
      report.objects.push_back(std::move(s));
    } catch (const Error& e) {
      report.warnings.push_back(sample.key() + ": " + e.what() + "; not scored");
    }
  }
  report.aggregate();
  return report;
}

}  // namespace alref::eval
