#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alref {

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  static Rational reduced(std::int64_t num, std::int64_t den);
};

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Raster() = default;
  Raster(int w, int h, std::uint8_t fill = 0);

  std::uint8_t* at(int x, int y) { return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  bool empty() const { return width == 0 || height == 0; }
  friend bool operator==(const Raster&, const Raster&) = default;
};

struct FrameImage {
  std::int64_t index = 0;
  Raster pixels;
};

class VideoClip {
 public:
  VideoClip() = default;
  // Validates: T >= 1, identical dimensions, contiguous 0-based indices.
  VideoClip(std::string id, Rational fps, std::vector<FrameImage> frames);

  const std::string& id() const { return id_; }
  Rational fps() const { return fps_; }
  const std::vector<FrameImage>& frames() const { return frames_; }
  const FrameImage& frame(std::int64_t index) const;
  std::int64_t size() const { return static_cast<std::int64_t>(frames_.size()); }
  int width() const { return frames_.front().pixels.width; }
  int height() const { return frames_.front().pixels.height; }
  double duration_seconds() const { return static_cast<double>(size()) / fps_.value(); }

 private:
  std::string id_;
  Rational fps_;
  std::vector<FrameImage> frames_;
};

/// Half-open pixel box [x_min, x_max) x [y_min, y_max).
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;
  double score = 0.0;
  std::string label;

  long long area() const { return static_cast<long long>(x_max - x_min) * (y_max - y_min); }
  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  bool valid_for(int image_width, int image_height) const;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  BinaryMask() = default;
  BinaryMask(int h, int w) : height(h), width(w), bits(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, bool on) { bits[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0; }
  std::size_t count() const;
  bool any() const;
  void clear();
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

enum class ReferenceSource { rvos_text, lbru_category };

struct Reference {
  std::string text;
  ReferenceSource source = ReferenceSource::rvos_text;
  std::optional<std::string> category;

  static Reference from_text(std::string text);
  friend bool operator==(const Reference&, const Reference&) = default;
};

struct MaskSequence {
  std::vector<BinaryMask> masks;
  std::vector<bool> silence_flags;
  Reference referent;

  std::size_t size() const { return masks.size(); }
  static MaskSequence empty_for(const VideoClip& clip, Reference referent);
};

double box_iou(const BoundingBox& a, const BoundingBox& b);
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Tight box around the foreground, or nullopt for an empty mask.
std::optional<BoundingBox> mask_bounding_box(const BinaryMask& mask);

/// Fills [x_min,x_max) x [y_min,y_max) of a blank mask.
BinaryMask box_mask(const BoundingBox& box, int height, int width);

}  // namespace alref
