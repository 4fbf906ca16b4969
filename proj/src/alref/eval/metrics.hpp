#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alref/core/types.hpp"

namespace alref::eval {

/// Foreground pixels with a background 4-neighbour inside the image.
BinaryMask boundary_map(const BinaryMask& mask);

/// ceil(0.008 * image diagonal)
int boundary_tolerance(int height, int width);

struct BoundaryScore {
  double precision = 1.0;
  double recall = 1.0;
  double f = 1.0;
};

// Boundary pixels of one mask count as matched when a boundary pixel of the
// other lies within Euclidean distance `tolerance`. Empty boundaries on both
// sides score 1; on one side only, 0.
BoundaryScore boundary_f(const BinaryMask& pred, const BinaryMask& gt, int tolerance);
BoundaryScore boundary_f(const BinaryMask& pred, const BinaryMask& gt);

/// Mean mask IoU over frames where `evaluated` is true (all when empty).
double region_j(const std::vector<BinaryMask>& pred, const std::vector<BinaryMask>& gt,
                const std::vector<bool>& evaluated = {});
double contour_f(const std::vector<BinaryMask>& pred, const std::vector<BinaryMask>& gt,
                 const std::vector<bool>& evaluated = {});

double region_j(const MaskSequence& pred, const MaskSequence& gt);
double contour_f(const MaskSequence& pred, const MaskSequence& gt);

struct ObjectScore {
  std::string video_id;
  std::string expression_id;
  std::string group;  // aggregation group (annotator), empty when unused
  double j = 0.0;
  double f = 0.0;
  std::size_t frames = 0;
};

// Per-object scores and dataset means. With groups present, means are taken
// per group first, then across groups.
struct MetricReport {
  std::string dataset;
  bool avs = false;
  std::vector<ObjectScore> objects;
  double j = 0.0;
  double f = 0.0;
  double jf = 0.0;
  std::vector<std::string> warnings;

  void aggregate();
};

nlohmann::json to_json(const MetricReport& r);

/// Header plus one row: "dataset,J&F,J,F" or, for AVS, "dataset,M_J,M_F".
std::string to_csv(const MetricReport& r);

}  // namespace alref::eval
