#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "alref/core/types.hpp"

namespace alref::io {

// Row-major run lengths, alternating background/foreground, starting with
// background (a leading zero when the first pixel is foreground). This is the
// mask encoding used on the model-server wire.
std::vector<std::uint32_t> rle_encode_rows(const BinaryMask& mask);
BinaryMask rle_decode_rows(const std::vector<std::uint32_t>& counts, int height, int width);

// COCO compressed RLE ("counts" string, column-major), as found in
// mask_dict.json annotations.
std::string coco_rle_encode(const BinaryMask& mask);
BinaryMask coco_rle_decode(std::string_view counts, int height, int width);

}  // namespace alref::io
