#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alref/core/types.hpp"

namespace alref::io {

std::vector<std::uint8_t> encode_png(const Raster& image);
Raster decode_png(std::span<const std::uint8_t> bytes);

// Per-pixel label plane of an annotation PNG. Palette images yield palette
// indices, grayscale yields the gray level, truecolor packs (r<<16 | g<<8 | b).
struct LabelPlane {
  int width = 0;
  int height = 0;
  bool indexed = false;
  std::vector<std::uint32_t> labels;
};

LabelPlane decode_png_labels(std::span<const std::uint8_t> bytes);

/// DAVIS palette: bit-interleaved colors for indices 0..255.
const std::vector<std::uint8_t>& davis_palette();

/// 8-bit palette PNG of per-pixel indices using the DAVIS palette.
std::vector<std::uint8_t> encode_index_png(int width, int height, const std::vector<std::uint8_t>& indices);

/// Two-entry palette PNG (0 = background black, 1 = object), DAVIS colors.
std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask);

}  // namespace alref::io
