#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "alref/core/types.hpp"

namespace alref::io {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// Content hash over dimensions and pixels; stable across PNG encoders.
std::string raster_hash(const Raster& image);

}  // namespace alref::io
