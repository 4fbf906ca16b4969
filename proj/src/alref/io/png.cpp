#include "alref/io/png.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>

#include "alref/core/error.hpp"

namespace alref::io {
namespace {

struct MemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->offset + length > src->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->data + src->offset, length);
  src->offset += length;
}

void silent_warning(png_structp, png_const_charp) {}

void record_error(png_structp png, png_const_charp msg) {
  auto* buffer = static_cast<char*>(png_get_error_ptr(png));
  std::snprintf(buffer, 256, "corrupt PNG: %s", msg);
  png_longjmp(png, 1);
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster& image) {
  require(!image.empty(), "encode_png: empty raster");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.rgb.data(), 0, nullptr)) {
    fail(ErrorCode::io, std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.rgb.data(), 0, nullptr)) {
    fail(ErrorCode::io, std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    fail(ErrorCode::io, std::string("PNG decode failed: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Raster out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    png_image_free(&img);
    fail(ErrorCode::io, std::string("PNG decode failed: ") + img.message);
  }
  return out;
}

LabelPlane decode_png_labels(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    fail(ErrorCode::io, "not a PNG stream");
  }
  LabelPlane plane;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  MemoryReader src{bytes.data(), bytes.size(), 0};
  char message[256] = "corrupt PNG";

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, message, record_error, silent_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::io, "libpng allocation failed");
  }
  // Only trivially destructible state lives between setjmp and the libpng calls.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::io, message);
  }
  png_set_read_fn(png, &src, read_from_memory);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (bit_depth < 8) png_set_packing(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const std::size_t channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);

  pixels.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  plane.width = static_cast<int>(width);
  plane.height = static_cast<int>(height);
  plane.indexed = color_type == PNG_COLOR_TYPE_PALETTE;
  plane.labels.resize(static_cast<std::size_t>(width) * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    const png_byte* row = rows[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      const png_byte* p = row + x * channels;
      std::uint32_t v = 0;
      if (channels >= 3) {
        v = (std::uint32_t{p[0]} << 16) | (std::uint32_t{p[1]} << 8) | p[2];
      } else {
        v = p[0];
      }
      plane.labels[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return plane;
}

const std::vector<std::uint8_t>& davis_palette() {
  static const std::vector<std::uint8_t> palette = [] {
    std::vector<std::uint8_t> p(256 * 3, 0);
    for (int i = 0; i < 256; ++i) {
      int c = i;
      std::uint8_t r = 0, g = 0, b = 0;
      for (int j = 0; j < 8; ++j) {
        r |= static_cast<std::uint8_t>(((c >> 0) & 1) << (7 - j));
        g |= static_cast<std::uint8_t>(((c >> 1) & 1) << (7 - j));
        b |= static_cast<std::uint8_t>(((c >> 2) & 1) << (7 - j));
        c >>= 3;
      }
      p[i * 3] = r;
      p[i * 3 + 1] = g;
      p[i * 3 + 2] = b;
    }
    return p;
  }();
  return palette;
}

std::vector<std::uint8_t> encode_index_png(int width, int height, const std::vector<std::uint8_t>& indices) {
  require(width > 0 && height > 0, "encode_index_png: empty image");
  require(indices.size() == static_cast<std::size_t>(width) * height, "encode_index_png: size mismatch");
  const int entries = 1 + *std::max_element(indices.begin(), indices.end());
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = PNG_FORMAT_RGB_COLORMAP;
  img.colormap_entries = static_cast<png_uint_32>(std::max(entries, 2));
  png_alloc_size_t size = 0;
  const auto* cmap = davis_palette().data();
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, indices.data(), 0, cmap)) {
    fail(ErrorCode::io, std::string("index PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, indices.data(), 0, cmap)) {
    fail(ErrorCode::io, std::string("index PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask) {
  require(mask.width > 0 && mask.height > 0, "encode_mask_png: empty mask");
  static const png_byte kColormap[] = {0, 0, 0, 128, 0, 0};
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(mask.width);
  img.height = static_cast<png_uint_32>(mask.height);
  img.format = PNG_FORMAT_RGB_COLORMAP;
  img.colormap_entries = 2;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, mask.bits.data(), 0, kColormap)) {
    fail(ErrorCode::io, std::string("mask PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, mask.bits.data(), 0, kColormap)) {
    fail(ErrorCode::io, std::string("mask PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

}  // namespace alref::io
