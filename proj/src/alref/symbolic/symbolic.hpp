#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "alref/core/types.hpp"
#include "alref/symbolic/glyphs.hpp"

namespace alref::symbolic {

enum class LabelMode { positional, absolute };

struct LabelStyle {
  Color ink{255, 235, 0};
  Color plate{0, 0, 0};
  int scale = 1;
};

struct GridOptions {
  int cells_per_row = 5;
  LabelMode label_mode = LabelMode::positional;
};

/// Frames tiled row-major into one raster, each cell stamped with a frame ID.
struct FrameGridImage {
  Raster pixels;
  int frame_count = 0;
  std::vector<std::int64_t> source_indices;
  std::vector<Rect> cells;
  std::vector<int> label_values;  // number painted on each cell
  std::vector<Rect> label_plates;
  LabelStyle id_label_style;
};

/// Pivot frame with numbered candidate outlines; box_ids[i] carries ID i + 1.
struct MarkedBoxImage {
  Raster pixels;
  std::int64_t frame_index = 0;
  std::vector<BoundingBox> box_ids;
  std::vector<Rect> label_plates;
  int outline_thickness = 1;
};

/// Up to `count` distinct indices, rounded linear spacing over [start, end - 1].
std::vector<std::int64_t> even_spread(std::int64_t start, std::int64_t end, int count);

// `count` indices from `start` spaced by `interval` when they fit inside
// [start, end); otherwise the even spread over the window.
std::vector<std::int64_t> sample_window(std::int64_t start, std::int64_t end, int count, int interval);
std::vector<std::int64_t> sample_frames(const VideoClip& clip, int count, int interval, std::int64_t start = 0);

/// Deterministic label scale derived from the frame size.
int label_scale_for(int width, int height);
int outline_thickness_for(int width, int height);

FrameGridImage compose_grid(const VideoClip& clip, const std::vector<std::int64_t>& indices,
                            const GridOptions& options = {});

MarkedBoxImage paint_boxes(const FrameImage& frame, const std::vector<BoundingBox>& boxes);

FrameGridImage compose_pivot_context(const MarkedBoxImage& marked, const VideoClip& clip,
                                     const std::vector<std::int64_t>& indices, const GridOptions& options = {});

/// The fixed 8-entry outline palette, cycled by box position.
const std::vector<Color>& box_palette();

}  // namespace alref::symbolic
