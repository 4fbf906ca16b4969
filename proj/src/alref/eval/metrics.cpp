#include "alref/eval/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "alref/core/error.hpp"

namespace alref::eval {

BinaryMask boundary_map(const BinaryMask& mask) {
  BinaryMask out(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      const bool edge = (x > 0 && !mask.get(x - 1, y)) || (x + 1 < mask.width && !mask.get(x + 1, y)) ||
                        (y > 0 && !mask.get(x, y - 1)) || (y + 1 < mask.height && !mask.get(x, y + 1));
      if (edge) out.set(x, y, true);
    }
  }
  return out;
}

int boundary_tolerance(int height, int width) {
  const double diagonal = std::sqrt(static_cast<double>(height) * height + static_cast<double>(width) * width);
  return static_cast<int>(std::ceil(0.008 * diagonal));
}

namespace {

// Marks every pixel within distance r of a boundary pixel of `b`.
BinaryMask dilate_disk(const BinaryMask& b, int r) {
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= r * r) offsets.emplace_back(dx, dy);
    }
  }
  BinaryMask out(b.height, b.width);
  for (int y = 0; y < b.height; ++y) {
    for (int x = 0; x < b.width; ++x) {
      if (!b.get(x, y)) continue;
      for (auto [dx, dy] : offsets) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx >= 0 && ny >= 0 && nx < b.width && ny < b.height) out.set(nx, ny, true);
      }
    }
  }
  return out;
}

std::size_t covered(const BinaryMask& points, const BinaryMask& zone) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < points.bits.size(); ++i) n += points.bits[i] & zone.bits[i];
  return n;
}

void check_pair(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width) {
    fail(ErrorCode::invalid_argument, "mask dimensions differ: " + std::to_string(a.width) + "x" +
                                          std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                          std::to_string(b.height));
  }
}

void check_sequences(std::size_t pred, std::size_t gt, std::size_t evaluated) {
  if (pred != gt) {
    fail(ErrorCode::invalid_argument, "sequence lengths differ: " + std::to_string(pred) + " predicted vs " +
                                          std::to_string(gt) + " ground-truth frames");
  }
  if (evaluated != 0 && evaluated != gt) fail(ErrorCode::invalid_argument, "evaluated-frame flags length differs");
}

template <class F>
double frame_mean(const std::vector<BinaryMask>& pred, const std::vector<BinaryMask>& gt,
                  const std::vector<bool>& evaluated, F&& per_frame) {
  check_sequences(pred.size(), gt.size(), evaluated.size());
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!evaluated.empty() && !evaluated[i]) continue;
    sum += per_frame(pred[i], gt[i]);
    ++n;
  }
  if (n == 0) fail(ErrorCode::invalid_argument, "no frames to evaluate");
  return sum / static_cast<double>(n);
}

}  // namespace

BoundaryScore boundary_f(const BinaryMask& pred, const BinaryMask& gt, int tolerance) {
  check_pair(pred, gt);
  require(tolerance >= 0, "boundary_f: negative tolerance");
  const BinaryMask bp = boundary_map(pred);
  const BinaryMask bg = boundary_map(gt);
  const std::size_t np = bp.count();
  const std::size_t ng = bg.count();

  BoundaryScore s;
  if (np == 0 && ng == 0) return s;
  if (np == 0 || ng == 0) {
    s.precision = np == 0 ? 1.0 : 0.0;
    s.recall = ng == 0 ? 1.0 : 0.0;
    s.f = 0.0;
    return s;
  }
  s.precision = static_cast<double>(covered(bp, dilate_disk(bg, tolerance))) / static_cast<double>(np);
  s.recall = static_cast<double>(covered(bg, dilate_disk(bp, tolerance))) / static_cast<double>(ng);
  s.f = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

BoundaryScore boundary_f(const BinaryMask& pred, const BinaryMask& gt) {
  return boundary_f(pred, gt, boundary_tolerance(gt.height, gt.width));
}

double region_j(const std::vector<BinaryMask>& pred, const std::vector<BinaryMask>& gt,
                const std::vector<bool>& evaluated) {
  return frame_mean(pred, gt, evaluated, [](const BinaryMask& p, const BinaryMask& g) { return mask_iou(p, g); });
}

double contour_f(const std::vector<BinaryMask>& pred, const std::vector<BinaryMask>& gt,
                 const std::vector<bool>& evaluated) {
  return frame_mean(pred, gt, evaluated,
                    [](const BinaryMask& p, const BinaryMask& g) { return boundary_f(p, g).f; });
}

double region_j(const MaskSequence& pred, const MaskSequence& gt) { return region_j(pred.masks, gt.masks); }
double contour_f(const MaskSequence& pred, const MaskSequence& gt) { return contour_f(pred.masks, gt.masks); }

void MetricReport::aggregate() {
  std::map<std::string, std::pair<double, double>> sums;
  std::map<std::string, std::size_t> counts;
  for (const auto& o : objects) {
    sums[o.group].first += o.j;
    sums[o.group].second += o.f;
    ++counts[o.group];
  }
  j = f = 0.0;
  for (const auto& [g, s] : sums) {
    j += s.first / static_cast<double>(counts[g]);
    f += s.second / static_cast<double>(counts[g]);
  }
  if (!sums.empty()) {
    j /= static_cast<double>(sums.size());
    f /= static_cast<double>(sums.size());
  }
  jf = (j + f) / 2.0;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : r.objects) {
    nlohmann::json j = {{"video_id", o.video_id},
                        {"expression_id", o.expression_id},
                        {"J", o.j},
                        {"F", o.f},
                        {"J&F", (o.j + o.f) / 2.0},
                        {"frames", o.frames}};
    if (!o.group.empty()) j["group"] = o.group;
    objects.push_back(std::move(j));
  }
  nlohmann::json out = {{"dataset", r.dataset},
                        {"avs", r.avs},
                        {"objects", objects},
                        {"J", r.j},
                        {"F", r.f},
                        {"J&F", r.jf},
                        {"warnings", r.warnings}};
  if (r.avs) {
    out["M_J"] = r.j;
    out["M_F"] = r.f;
  }
  return out;
}

std::string to_csv(const MetricReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  if (r.avs) {
    os << "dataset,M_J,M_F\n" << r.dataset << "," << r.j * 100 << "," << r.f * 100 << "\n";
  } else {
    os << "dataset,J&F,J,F\n" << r.dataset << "," << r.jf * 100 << "," << r.j * 100 << "," << r.f * 100 << "\n";
  }
  return os.str();
}

}  // namespace alref::eval
