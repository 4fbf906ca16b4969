#include "alref/symbolic/glyphs.hpp"

#include <algorithm>

#include "alref/core/error.hpp"

namespace alref::symbolic {
namespace {

// 5x7 digits, one byte per row, bit 4 = leftmost column.
constexpr std::array<std::array<std::uint8_t, kGlyphHeight>, 10> kDigits = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
}};

void put(Raster& image, int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= image.width || y >= image.height) return;
  auto* p = image.at(x, y);
  p[0] = c[0];
  p[1] = c[1];
  p[2] = c[2];
}

}  // namespace

Rect label_extent(std::string_view digits, int scale) {
  require(scale >= 1, "label scale must be >= 1");
  const int n = static_cast<int>(digits.size());
  const int pad = scale;
  const int text_w = n * (kGlyphWidth + 1) * scale - scale;
  return Rect{0, 0, text_w + 2 * pad, kGlyphHeight * scale + 2 * pad};
}

void fill_rect(Raster& image, const Rect& r, Color color) {
  for (int y = r.y; y < r.y + r.height; ++y) {
    for (int x = r.x; x < r.x + r.width; ++x) put(image, x, y, color);
  }
}

Rect paint_label(Raster& image, int x, int y, std::string_view digits, int scale, Color ink, Color plate) {
  Rect r = label_extent(digits, scale);
  r.x = x;
  r.y = y;
  fill_rect(image, r, plate);
  int pen_x = x + scale;
  const int pen_y = y + scale;
  for (char ch : digits) {
    require(ch >= '0' && ch <= '9', "labels may only contain digits");
    const auto& glyph = kDigits[static_cast<std::size_t>(ch - '0')];
    for (int gy = 0; gy < kGlyphHeight; ++gy) {
      for (int gx = 0; gx < kGlyphWidth; ++gx) {
        if (!(glyph[gy] & (0x10 >> gx))) continue;
        fill_rect(image, Rect{pen_x + gx * scale, pen_y + gy * scale, scale, scale}, ink);
      }
    }
    pen_x += (kGlyphWidth + 1) * scale;
  }
  return r;
}

}  // namespace alref::symbolic
