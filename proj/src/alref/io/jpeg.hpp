#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alref/core/types.hpp"

namespace alref::io {

Raster decode_jpeg(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_jpeg(const Raster& image, int quality = 95);

/// Dispatches on the file signature (PNG or JPEG).
Raster decode_image(std::span<const std::uint8_t> bytes);

}  // namespace alref::io
