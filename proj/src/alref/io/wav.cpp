#include "alref/io/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "alref/core/error.hpp"

namespace alref::io {
namespace {

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}
std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

float sample_at(const std::uint8_t* p, int format, int bits) {
  if (format == 3 && bits == 32) {
    float f;
    std::memcpy(&f, p, 4);
    return f;
  }
  switch (bits) {
    case 8: return (static_cast<int>(p[0]) - 128) / 128.0f;
    case 16: return static_cast<std::int16_t>(le16(p)) / 32768.0f;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>((std::uint32_t{p[0]} << 8) | (std::uint32_t{p[1]} << 16) |
                                                  (std::uint32_t{p[2]} << 24));
      return static_cast<float>(v >> 8) / 8388608.0f;
    }
    case 32: return static_cast<float>(static_cast<std::int32_t>(le32(p)) / 2147483648.0);
  }
  return 0.0f;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorCode::io, "not a RIFF/WAVE stream");
  }
  int format = 0, channels = 0, rate = 0, bits = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0 && avail >= 16) {
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = static_cast<int>(le32(chunk + 12));
      bits = le16(chunk + 22);
      if (format == 0xFFFE && avail >= 26) format = le16(chunk + 8 + 24);  // WAVE_FORMAT_EXTENSIBLE
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (!data || channels <= 0 || rate <= 0) fail(ErrorCode::io, "WAVE stream lacks fmt or data chunk");
  if (!(format == 1 || (format == 3 && bits == 32)) || (bits != 8 && bits != 16 && bits != 24 && bits != 32)) {
    fail(ErrorCode::io, "unsupported WAVE encoding (format " + std::to_string(format) + ", " +
                            std::to_string(bits) + " bits)");
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t frames = data_size / frame_bytes;
  std::vector<float> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    float acc = 0.0f;
    for (int c = 0; c < channels; ++c) acc += sample_at(data + i * frame_bytes + c * (bits / 8), format, bits);
    mono[i] = acc / static_cast<float>(channels);
  }
  return AudioClip(std::move(mono), rate);
}

std::vector<std::uint8_t> encode_wav(const AudioClip& audio) {
  const auto n = static_cast<std::uint32_t>(audio.samples().size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(audio.sample_rate()));
  put32(out, static_cast<std::uint32_t>(audio.sample_rate()) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, 2 * n);
  for (float s : audio.samples()) {
    const auto v = static_cast<std::int16_t>(std::clamp<long>(std::lround(static_cast<double>(s) * 32768.0), -32768, 32767));
    put16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

}  // namespace alref::io
