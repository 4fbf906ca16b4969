#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alref/backends/interfaces.hpp"
#include "alref/core/audio.hpp"
#include "alref/core/error.hpp"
#include "alref/core/types.hpp"

// JSON codecs for the model-server protocol (alref-proto/1). Decoders throw
// ErrorCode::protocol on schema violations.
namespace alref::backends::protocol {

inline constexpr const char* kVersionHeader = "alref-proto";
inline constexpr const char* kVersion = "1";

namespace path {
inline constexpr const char* chat = "/v1/chat";
inline constexpr const char* ground = "/v1/ground";
inline constexpr const char* segment_open = "/v1/segment/open";
inline constexpr const char* segment_prompt = "/v1/segment/prompt";
inline constexpr const char* segment_propagate = "/v1/segment/propagate";
inline constexpr const char* audio_tag = "/v1/audio/tag";
inline constexpr const char* embed_audio = "/v1/embed/audio";
inline constexpr const char* embed_text = "/v1/embed/text";
inline constexpr const char* sed = "/v1/sed";
}  // namespace path

using nlohmann::json;

// {"format": "png", "width": W, "height": H, "data": base64}
json encode_image(const Raster& image);
Raster decode_image(const json& j);

// {"encoding": "pcm16", "sample_rate": R, "data": base64 little-endian int16}
json encode_audio(const AudioClip& audio);
AudioClip decode_audio(const json& j);

json encode_box(const BoundingBox& box);
/// Fractional corners are widened to whole pixels (floor min, ceil max).
BoundingBox decode_box(const json& j);

// {"frame_index": f, "counts": [...]} with row-major runs starting at background.
json encode_mask(std::int64_t frame_index, const BinaryMask& mask);
BinaryMask decode_mask(const json& j, int height, int width);

/// "data:image/png;base64,..."
std::string image_data_url(const Raster& image);
Raster decode_data_url(const std::string& url);

// Chat: OpenAI-compatible chat-completions shape.
json chat_request(const std::string& model, std::span<const Raster* const> images, const std::string& text);
std::string parse_chat_response(const json& j);
json chat_response(const std::string& reply, const std::string& model = "stub");

struct ChatRequestView {
  std::string text;
  std::vector<Raster> images;
};
ChatRequestView parse_chat_request(const json& j);

json ground_request(const Raster& image, const std::string& phrase, double text_threshold, double box_threshold);
json ground_response(const std::vector<BoundingBox>& boxes);
std::vector<BoundingBox> parse_ground_response(const json& j);

json segment_open_request(const VideoClip& clip);
json segment_open_response(const SessionId& session, std::int64_t frame_count);
SessionId parse_segment_open_response(const json& j, std::int64_t expected_frames);
VideoClip parse_segment_open_request(const json& j);

json segment_prompt_request(const SessionId& session, std::int64_t frame_index, const BoundingBox& box);
json segment_propagate_request(const SessionId& session, std::int64_t start_frame);
json segment_propagate_response(const std::vector<BinaryMask>& masks);
std::vector<BinaryMask> parse_segment_propagate_response(const json& j, std::int64_t frames, int height, int width);

json audio_request(const AudioClip& audio);
json tag_response(const std::vector<ScoredLabel>& labels);
std::vector<ScoredLabel> parse_tag_response(const json& j);

json embed_text_request(const std::string& text);
json embedding_response(const EmbeddingVector& v);
EmbeddingVector parse_embedding_response(const json& j);

json sed_response(const std::vector<double>& boundaries);
std::vector<double> parse_sed_response(const json& j);

/// {"error": {"type": t, "message": m}}
json error_body(const std::string& type, const std::string& message);

/// Maps a non-2xx reply to a typed Error.
Error error_from_response(int status, const std::string& body, const std::string& endpoint);

/// Field accessor that raises ErrorCode::protocol instead of json exceptions.
const json& field(const json& j, const char* key);

}  // namespace alref::backends::protocol
