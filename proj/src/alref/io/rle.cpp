#include "alref/io/rle.hpp"

#include "alref/core/error.hpp"

namespace alref::io {
namespace {

std::vector<std::uint32_t> runs_of(const std::vector<std::uint8_t>& flat) {
  std::vector<std::uint32_t> counts;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint8_t v : flat) {
    if (v != current) {
      counts.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

std::vector<std::uint8_t> expand_runs(const std::vector<std::uint32_t>& counts, std::size_t total) {
  std::vector<std::uint8_t> flat;
  flat.reserve(total);
  std::uint8_t value = 0;
  for (std::uint32_t c : counts) {
    if (flat.size() + c > total) fail(ErrorCode::protocol, "RLE runs exceed mask size");
    flat.insert(flat.end(), c, value);
    value ^= 1;
  }
  if (flat.size() != total) fail(ErrorCode::protocol, "RLE runs do not cover the mask");
  return flat;
}

}  // namespace

std::vector<std::uint32_t> rle_encode_rows(const BinaryMask& mask) { return runs_of(mask.bits); }

BinaryMask rle_decode_rows(const std::vector<std::uint32_t>& counts, int height, int width) {
  if (height <= 0 || width <= 0) fail(ErrorCode::protocol, "RLE mask has non-positive size");
  BinaryMask m(height, width);
  m.bits = expand_runs(counts, static_cast<std::size_t>(height) * width);
  return m;
}

std::string coco_rle_encode(const BinaryMask& mask) {
  std::vector<std::uint8_t> column_major(mask.bits.size());
  for (int x = 0; x < mask.width; ++x) {
    for (int y = 0; y < mask.height; ++y) {
      column_major[static_cast<std::size_t>(x) * mask.height + y] = mask.get(x, y);
    }
  }
  const auto counts = runs_of(column_major);
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    long long x = counts[i];
    if (i > 2) x -= static_cast<long long>(counts[i - 2]);
    bool more = true;
    while (more) {
      long long c = x & 0x1f;
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      out.push_back(static_cast<char>(c + 48));
    }
  }
  return out;
}

BinaryMask coco_rle_decode(std::string_view counts_text, int height, int width) {
  if (height <= 0 || width <= 0) fail(ErrorCode::io, "COCO RLE has non-positive size");
  std::vector<std::uint32_t> counts;
  std::size_t p = 0;
  while (p < counts_text.size()) {
    long long x = 0;
    int k = 0;
    bool more = true;
    long long c = 0;
    while (more) {
      if (p >= counts_text.size()) fail(ErrorCode::io, "truncated COCO RLE string");
      c = static_cast<long long>(counts_text[p]) - 48;
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -1LL << (5 * k);
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    if (x < 0) fail(ErrorCode::io, "negative run in COCO RLE string");
    counts.push_back(static_cast<std::uint32_t>(x));
  }
  const auto column_major = expand_runs(counts, static_cast<std::size_t>(height) * width);
  BinaryMask m(height, width);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) m.set(x, y, column_major[static_cast<std::size_t>(x) * height + y] != 0);
  }
  return m;
}

}  // namespace alref::io
