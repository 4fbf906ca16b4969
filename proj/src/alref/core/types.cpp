#include "alref/core/types.hpp"

#include <algorithm>
#include <numeric>

#include "alref/core/error.hpp"

namespace alref {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::backend: return "backend";
    case ErrorCode::protocol: return "protocol";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::referent_absent: return "referent_absent";
    case ErrorCode::scenario: return "scenario";
  }
  return "unknown";
}

Rational Rational::reduced(std::int64_t num, std::int64_t den) {
  require(num > 0 && den > 0, "rational rate must be positive");
  const auto g = std::gcd(num, den);
  return Rational{num / g, den / g};
}

Raster::Raster(int w, int h, std::uint8_t fill)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {
  require(w >= 0 && h >= 0, "raster dimensions must be non-negative");
}

VideoClip::VideoClip(std::string id, Rational fps, std::vector<FrameImage> frames)
    : id_(std::move(id)), fps_(fps), frames_(std::move(frames)) {
  require(!frames_.empty(), "video '" + id_ + "' has no frames");
  require(fps_.num > 0 && fps_.den > 0, "video '" + id_ + "' has a non-positive frame rate");
  const int w = frames_.front().pixels.width;
  const int h = frames_.front().pixels.height;
  require(w >= 1 && h >= 1, "video '" + id_ + "' has empty frames");
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& f = frames_[i];
    require(f.index == static_cast<std::int64_t>(i),
            "video '" + id_ + "' frame indices must be contiguous from 0");
    require(f.pixels.width == w && f.pixels.height == h,
            "video '" + id_ + "' frames differ in size at index " + std::to_string(i));
  }
}

const FrameImage& VideoClip::frame(std::int64_t index) const {
  require(index >= 0 && index < size(), "frame index " + std::to_string(index) + " out of range");
  return frames_[static_cast<std::size_t>(index)];
}

bool BoundingBox::valid_for(int image_width, int image_height) const {
  return 0 <= x_min && x_min < x_max && x_max <= image_width && 0 <= y_min && y_min < y_max &&
         y_max <= image_height && score >= 0.0 && score <= 1.0;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

bool BinaryMask::any() const {
  return std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

void BinaryMask::clear() { std::fill(bits.begin(), bits.end(), std::uint8_t{0}); }

Reference Reference::from_text(std::string text) {
  require(!text.empty(), "reference text must be non-empty");
  return Reference{std::move(text), ReferenceSource::rvos_text, std::nullopt};
}

MaskSequence MaskSequence::empty_for(const VideoClip& clip, Reference referent) {
  MaskSequence seq;
  seq.masks.assign(static_cast<std::size_t>(clip.size()), BinaryMask(clip.height(), clip.width()));
  seq.silence_flags.assign(static_cast<std::size_t>(clip.size()), false);
  seq.referent = std::move(referent);
  return seq;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const long long ix = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const long long iy = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width) {
    fail(ErrorCode::invalid_argument, "mask_iou: dimension mismatch " + std::to_string(a.width) +
                                          "x" + std::to_string(a.height) + " vs " +
                                          std::to_string(b.width) + "x" + std::to_string(b.height));
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    inter += (a.bits[i] & b.bits[i]);
    uni += (a.bits[i] | b.bits[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<BoundingBox> mask_bounding_box(const BinaryMask& mask) {
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return BoundingBox{x0, y0, x1 + 1, y1 + 1, 1.0, {}};
}

BinaryMask box_mask(const BoundingBox& box, int height, int width) {
  BinaryMask m(height, width);
  for (int y = std::max(0, box.y_min); y < std::min(height, box.y_max); ++y) {
    for (int x = std::max(0, box.x_min); x < std::min(width, box.x_max); ++x) m.set(x, y, true);
  }
  return m;
}

}  // namespace alref
