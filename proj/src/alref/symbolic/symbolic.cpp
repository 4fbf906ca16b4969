#include "alref/symbolic/symbolic.hpp"

#include <algorithm>
#include <cmath>

#include "alref/core/error.hpp"

namespace alref::symbolic {
namespace {

void blit(Raster& dst, const Raster& src, int ox, int oy) {
  for (int y = 0; y < src.height; ++y) {
    std::copy_n(src.at(0, y), static_cast<std::size_t>(src.width) * 3, dst.at(ox, oy + y));
  }
}

FrameGridImage compose(const VideoClip& clip, const std::vector<std::int64_t>& indices,
                       const GridOptions& options, const MarkedBoxImage* marked) {
  require(!indices.empty(), "compose_grid: no frames selected");
  require(options.cells_per_row >= 1, "compose_grid: cells_per_row must be >= 1");
  for (auto i : indices) require(i >= 0 && i < clip.size(), "compose_grid: frame index out of range");

  const int w = clip.width();
  const int h = clip.height();
  const int m = static_cast<int>(indices.size());
  const int cols = std::min(m, options.cells_per_row);
  const int rows = (m + cols - 1) / cols;

  FrameGridImage grid;
  grid.pixels = Raster(cols * w, rows * h);
  grid.frame_count = m;
  grid.source_indices = indices;
  grid.id_label_style.scale = label_scale_for(w, h);

  for (int k = 0; k < m; ++k) {
    const Rect cell{(k % cols) * w, (k / cols) * h, w, h};
    const bool is_marked = marked && marked->frame_index == indices[static_cast<std::size_t>(k)];
    blit(grid.pixels, is_marked ? marked->pixels : clip.frame(indices[static_cast<std::size_t>(k)]).pixels,
         cell.x, cell.y);
    const int value = options.label_mode == LabelMode::positional
                          ? k + 1
                          : static_cast<int>(indices[static_cast<std::size_t>(k)]);
    Rect plate = paint_label(grid.pixels, cell.x, cell.y, std::to_string(value), grid.id_label_style.scale,
                             grid.id_label_style.ink, grid.id_label_style.plate);
    grid.cells.push_back(cell);
    grid.label_values.push_back(value);
    grid.label_plates.push_back(plate);
  }
  return grid;
}

}  // namespace

std::vector<std::int64_t> even_spread(std::int64_t start, std::int64_t end, int count) {
  require(count >= 1, "sample count must be >= 1");
  require(end > start, "cannot sample an empty window");
  const std::int64_t length = end - start;
  const auto n = std::min<std::int64_t>(count, length);
  if (n == 1) return {start};
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(i) * static_cast<double>(length - 1) / static_cast<double>(n - 1);
    out.push_back(start + static_cast<std::int64_t>(std::llround(v)));
  }
  return out;
}

std::vector<std::int64_t> sample_window(std::int64_t start, std::int64_t end, int count, int interval) {
  require(count >= 1, "sample count must be >= 1");
  require(interval >= 1, "sample interval must be >= 1");
  require(end > start, "cannot sample an empty window");
  if (start + static_cast<std::int64_t>(count - 1) * interval > end - 1) return even_spread(start, end, count);
  std::vector<std::int64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(start + static_cast<std::int64_t>(i) * interval);
  return out;
}

std::vector<std::int64_t> sample_frames(const VideoClip& clip, int count, int interval, std::int64_t start) {
  if (clip.size() == 0) fail(ErrorCode::invalid_argument, "sample_frames: empty clip");
  require(start >= 0 && start < clip.size(), "sample_frames: start outside the clip");
  return sample_window(start, clip.size(), count, interval);
}

int label_scale_for(int width, int height) { return std::max(1, std::min(width, height) / 100); }

int outline_thickness_for(int width, int height) { return std::max(1, std::min(width, height) / 160); }

const std::vector<Color>& box_palette() {
  static const std::vector<Color> kPalette = {
      Color{230, 25, 75},  Color{60, 180, 75},  Color{0, 130, 200},  Color{245, 130, 48},
      Color{145, 30, 180}, Color{70, 240, 240}, Color{240, 50, 230}, Color{210, 245, 60},
  };
  return kPalette;
}

FrameGridImage compose_grid(const VideoClip& clip, const std::vector<std::int64_t>& indices,
                            const GridOptions& options) {
  return compose(clip, indices, options, nullptr);
}

MarkedBoxImage paint_boxes(const FrameImage& frame, const std::vector<BoundingBox>& boxes) {
  if (boxes.empty()) fail(ErrorCode::invalid_argument, "paint_boxes: at least one candidate box is required");
  const int w = frame.pixels.width;
  const int h = frame.pixels.height;
  for (const auto& b : boxes) require(b.valid_for(w, h), "paint_boxes: box outside the frame");

  MarkedBoxImage marked;
  marked.pixels = frame.pixels;
  marked.frame_index = frame.index;
  marked.box_ids = boxes;
  marked.outline_thickness = outline_thickness_for(w, h);
  const int t = marked.outline_thickness;
  const auto& palette = box_palette();

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const Color color = palette[i % palette.size()];
    fill_rect(marked.pixels, Rect{b.x_min, b.y_min, b.width(), std::min(t, b.height())}, color);
    fill_rect(marked.pixels, Rect{b.x_min, std::max(b.y_min, b.y_max - t), b.width(), std::min(t, b.height())},
              color);
    fill_rect(marked.pixels, Rect{b.x_min, b.y_min, std::min(t, b.width()), b.height()}, color);
    fill_rect(marked.pixels, Rect{std::max(b.x_min, b.x_max - t), b.y_min, std::min(t, b.width()), b.height()},
              color);
  }
  // Labels go on after every outline so no outline can cover an ID.
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const Color color = palette[i % palette.size()];
    const int luminance = (299 * color[0] + 587 * color[1] + 114 * color[2]) / 1000;
    const Color ink = luminance > 128 ? Color{0, 0, 0} : Color{255, 255, 255};
    const std::string id = std::to_string(i + 1);
    int scale = label_scale_for(w, h);
    Rect extent = label_extent(id, scale);
    while (scale > 1 && (extent.width > w || extent.height > h)) extent = label_extent(id, --scale);
    const int x = std::max(0, std::min(b.x_min, w - extent.width));
    const int y = std::max(0, std::min(b.y_min, h - extent.height));
    marked.label_plates.push_back(paint_label(marked.pixels, x, y, id, scale, ink, color));
  }
  return marked;
}

FrameGridImage compose_pivot_context(const MarkedBoxImage& marked, const VideoClip& clip,
                                     const std::vector<std::int64_t>& indices, const GridOptions& options) {
  if (std::find(indices.begin(), indices.end(), marked.frame_index) == indices.end()) {
    fail(ErrorCode::invalid_argument, "compose_pivot_context: pivot frame " + std::to_string(marked.frame_index) +
                                          " is not among the sampled frames");
  }
  require(marked.pixels.width == clip.width() && marked.pixels.height == clip.height(),
          "compose_pivot_context: marked frame size differs from the clip");
  return compose(clip, indices, options, &marked);
}

}  // namespace alref::symbolic
