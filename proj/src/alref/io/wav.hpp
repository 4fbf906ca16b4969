#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alref/core/audio.hpp"

namespace alref::io {

/// RIFF/WAVE with PCM 8/16/24/32-bit or IEEE float32; channels are averaged to mono.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

/// 16-bit mono PCM.
std::vector<std::uint8_t> encode_wav(const AudioClip& audio);

}  // namespace alref::io
