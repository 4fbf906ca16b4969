#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "alref/core/types.hpp"

namespace alref::symbolic {

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool contains(int px, int py) const { return px >= x && px < x + width && py >= y && py < y + height; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

using Color = std::array<std::uint8_t, 3>;

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

/// Size of the backing plate for `text` rendered at integer `scale`.
Rect label_extent(std::string_view digits, int scale);

/// Paints a plate of `plate` color at (x, y) with `digits` in `ink`; pixels
/// falling outside the raster are clipped. Returns the plate rectangle.
Rect paint_label(Raster& image, int x, int y, std::string_view digits, int scale, Color ink, Color plate);

void fill_rect(Raster& image, const Rect& r, Color color);

}  // namespace alref::symbolic
