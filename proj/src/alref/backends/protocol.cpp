#include "alref/backends/protocol.hpp"

#include <cmath>
#include <algorithm>

#include "alref/core/error.hpp"
#include "alref/io/base64.hpp"
#include "alref/io/png.hpp"
#include "alref/io/rle.hpp"

namespace alref::backends::protocol {

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::protocol, what); }

template <class T>
T get_as(const json& j, const char* key) {
  const json& v = field(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

std::string get_string(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

const json& get_array(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) bad(std::string("field '") + key + "' must be an array");
  return v;
}

}  // namespace

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

json encode_image(const Raster& image) {
  return {{"format", "png"},
          {"width", image.width},
          {"height", image.height},
          {"data", io::base64_encode(io::encode_png(image))}};
}

Raster decode_image(const json& j) {
  if (get_string(j, "format") != "png") bad("only png images are supported");
  const auto bytes = io::base64_decode(get_string(j, "data"));
  Raster r;
  try {
    r = io::decode_png(bytes);
  } catch (const Error& e) {
    bad(std::string("image payload: ") + e.what());
  }
  if (r.width != get_integer(j, "width") || r.height != get_integer(j, "height"))
    bad("image dimensions disagree with the PNG payload");
  return r;
}

json encode_audio(const AudioClip& audio) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(audio.samples().size() * 2);
  for (float s : audio.samples()) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0f));
    const auto u = static_cast<std::uint16_t>(v);
    bytes.push_back(static_cast<std::uint8_t>(u & 0xff));
    bytes.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return {{"encoding", "pcm16"}, {"sample_rate", audio.sample_rate()}, {"data", io::base64_encode(bytes)}};
}

AudioClip decode_audio(const json& j) {
  if (get_string(j, "encoding") != "pcm16") bad("only pcm16 audio is supported");
  const auto rate = get_integer(j, "sample_rate");
  if (rate <= 0) bad("sample_rate must be positive");
  const auto bytes = io::base64_decode(get_string(j, "data"));
  if (bytes.size() % 2 != 0) bad("pcm16 payload has an odd byte count");
  std::vector<float> samples(bytes.size() / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto u = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    samples[i] = static_cast<float>(static_cast<std::int16_t>(u)) / 32767.0f;
  }
  return AudioClip(std::move(samples), static_cast<int>(rate));
}

json encode_box(const BoundingBox& b) {
  return {{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max},
          {"y_max", b.y_max}, {"score", b.score},  {"label", b.label}};
}

BoundingBox decode_box(const json& j) {
  BoundingBox b;
  auto corner = [&](const char* key, bool low) {
    const double v = get_number(j, key);
    if (!std::isfinite(v) || std::abs(v) > 1e9) bad(std::string("box field '") + key + "' is out of range");
    return static_cast<int>(low ? std::floor(v) : std::ceil(v));
  };
  b.x_min = corner("x_min", true);
  b.y_min = corner("y_min", true);
  b.x_max = corner("x_max", false);
  b.y_max = corner("y_max", false);
  b.score = get_number(j, "score");
  if (j.contains("label")) {
    if (!j["label"].is_string()) bad("box label must be a string");
    b.label = j["label"].get<std::string>();
  }
  return b;
}

json encode_mask(std::int64_t frame_index, const BinaryMask& mask) {
  return {{"frame_index", frame_index}, {"counts", io::rle_encode_rows(mask)}};
}

BinaryMask decode_mask(const json& j, int height, int width) {
  const json& counts = get_array(j, "counts");
  std::vector<std::uint32_t> runs;
  runs.reserve(counts.size());
  for (const auto& c : counts) {
    if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0))
      bad("mask counts must be non-negative integers");
    runs.push_back(c.get<std::uint32_t>());
  }
  return io::rle_decode_rows(runs, height, width);
}

std::string image_data_url(const Raster& image) {
  return "data:image/png;base64," + io::base64_encode(io::encode_png(image));
}

Raster decode_data_url(const std::string& url) {
  static const std::string prefix = "data:image/png;base64,";
  if (url.compare(0, prefix.size(), prefix) != 0) bad("image_url must be a base64 PNG data URL");
  return io::decode_png(io::base64_decode(std::string_view(url).substr(prefix.size())));
}

json chat_request(const std::string& model, std::span<const Raster* const> images, const std::string& text) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", text}});
  for (const Raster* img : images) {
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_data_url(*img)}}}});
  }
  return {{"model", model},
          {"temperature", 0},
          {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

ChatRequestView parse_chat_request(const json& j) {
  ChatRequestView view;
  const json& messages = get_array(j, "messages");
  for (const auto& m : messages) {
    const json& content = field(m, "content");
    if (content.is_string()) {
      view.text += content.get<std::string>();
      continue;
    }
    if (!content.is_array()) bad("message content must be a string or an array");
    for (const auto& part : content) {
      const std::string type = get_string(part, "type");
      if (type == "text") {
        view.text += get_string(part, "text");
      } else if (type == "image_url") {
        view.images.push_back(decode_data_url(get_string(field(part, "image_url"), "url")));
      } else {
        bad("unsupported content part '" + type + "'");
      }
    }
  }
  return view;
}

std::string parse_chat_response(const json& j) {
  const json& choices = get_array(j, "choices");
  if (choices.empty()) bad("chat response has no choices");
  const json& message = field(choices.front(), "message");
  const json& content = field(message, "content");
  if (content.is_null()) return {};
  if (!content.is_string()) bad("chat message content must be a string");
  return content.get<std::string>();
}

json chat_response(const std::string& reply, const std::string& model) {
  return {{"object", "chat.completion"},
          {"model", model},
          {"choices", json::array({{{"index", 0},
                                    {"message", {{"role", "assistant"}, {"content", reply}}},
                                    {"finish_reason", "stop"}}})}};
}

json ground_request(const Raster& image, const std::string& phrase, double text_threshold, double box_threshold) {
  return {{"image", encode_image(image)},
          {"phrase", phrase},
          {"text_threshold", text_threshold},
          {"box_threshold", box_threshold}};
}

json ground_response(const std::vector<BoundingBox>& boxes) {
  json list = json::array();
  for (const auto& b : boxes) list.push_back(encode_box(b));
  return {{"boxes", list}};
}

std::vector<BoundingBox> parse_ground_response(const json& j) {
  std::vector<BoundingBox> out;
  for (const auto& b : get_array(j, "boxes")) out.push_back(decode_box(b));
  return out;
}

json segment_open_request(const VideoClip& clip) {
  json frames = json::array();
  for (const auto& f : clip.frames()) frames.push_back(encode_image(f.pixels));
  return {{"video_id", clip.id()}, {"fps", {clip.fps().num, clip.fps().den}}, {"frames", frames}};
}

VideoClip parse_segment_open_request(const json& j) {
  const json& frames = get_array(j, "frames");
  const json& fps = get_array(j, "fps");
  if (fps.size() != 2 || !fps[0].is_number_integer() || !fps[1].is_number_integer()) bad("fps must be [num, den]");
  std::vector<FrameImage> decoded;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    decoded.push_back({static_cast<std::int64_t>(i), decode_image(frames[i])});
  }
  try {
    return VideoClip(get_string(j, "video_id"), Rational{fps[0].get<std::int64_t>(), fps[1].get<std::int64_t>()},
                     std::move(decoded));
  } catch (const Error& e) {
    bad(e.what());
  }
}

json segment_open_response(const SessionId& session, std::int64_t frame_count) {
  return {{"session", session}, {"frame_count", frame_count}};
}

SessionId parse_segment_open_response(const json& j, std::int64_t expected_frames) {
  auto session = get_string(j, "session");
  if (session.empty()) bad("empty session handle");
  if (get_integer(j, "frame_count") != expected_frames)
    bad("segmenter session holds " + std::to_string(get_integer(j, "frame_count")) + " frames, sent " +
        std::to_string(expected_frames));
  return session;
}

json segment_prompt_request(const SessionId& session, std::int64_t frame_index, const BoundingBox& box) {
  return {{"session", session}, {"frame_index", frame_index}, {"box", encode_box(box)}};
}

json segment_propagate_request(const SessionId& session, std::int64_t start_frame) {
  return {{"session", session}, {"start_frame", start_frame}};
}

json segment_propagate_response(const std::vector<BinaryMask>& masks) {
  json list = json::array();
  for (std::size_t i = 0; i < masks.size(); ++i) list.push_back(encode_mask(static_cast<std::int64_t>(i), masks[i]));
  const int h = masks.empty() ? 0 : masks.front().height;
  const int w = masks.empty() ? 0 : masks.front().width;
  return {{"height", h}, {"width", w}, {"masks", list}};
}

std::vector<BinaryMask> parse_segment_propagate_response(const json& j, std::int64_t frames, int height, int width) {
  if (get_integer(j, "height") != height || get_integer(j, "width") != width)
    bad("propagated masks have the wrong dimensions");
  const json& list = get_array(j, "masks");
  if (static_cast<std::int64_t>(list.size()) != frames)
    bad("segmenter returned " + std::to_string(list.size()) + " masks for " + std::to_string(frames) + " frames");
  std::vector<BinaryMask> out;
  out.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (get_integer(list[i], "frame_index") != static_cast<std::int64_t>(i)) bad("masks are not in frame order");
    out.push_back(decode_mask(list[i], height, width));
  }
  return out;
}

json audio_request(const AudioClip& audio) { return {{"audio", encode_audio(audio)}}; }

json tag_response(const std::vector<ScoredLabel>& labels) {
  json list = json::array();
  for (const auto& l : labels) list.push_back({{"label", l.label}, {"score", l.score}});
  return {{"labels", list}};
}

std::vector<ScoredLabel> parse_tag_response(const json& j) {
  std::vector<ScoredLabel> out;
  for (const auto& l : get_array(j, "labels")) out.push_back({get_string(l, "label"), get_number(l, "score")});
  return out;
}

json embed_text_request(const std::string& text) { return {{"text", text}}; }

json embedding_response(const EmbeddingVector& v) { return {{"embedding", v.values}}; }

EmbeddingVector parse_embedding_response(const json& j) {
  EmbeddingVector v;
  for (const auto& x : get_array(j, "embedding")) {
    if (!x.is_number()) bad("embedding entries must be numbers");
    v.values.push_back(x.get<double>());
  }
  return v;
}

json sed_response(const std::vector<double>& boundaries) { return {{"boundaries", boundaries}}; }

std::vector<double> parse_sed_response(const json& j) {
  std::vector<double> out;
  for (const auto& x : get_array(j, "boundaries")) {
    if (!x.is_number()) bad("boundaries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

json error_body(const std::string& type, const std::string& message) {
  return {{"error", {{"type", type}, {"message", message}}}};
}

Error error_from_response(int status, const std::string& body, const std::string& endpoint) {
  std::string type;
  std::string message = body;
  auto parsed = json::parse(body, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("error")) {
    const json& e = parsed["error"];
    if (e.is_object()) {
      if (e.contains("type") && e["type"].is_string()) type = e["type"].get<std::string>();
      if (e.contains("message") && e["message"].is_string()) message = e["message"].get<std::string>();
    } else if (e.is_string()) {
      message = e.get<std::string>();
    }
  }
  const std::string what = endpoint + " returned HTTP " + std::to_string(status) +
                           (type.empty() ? "" : " (" + type + ")") + ": " + message;
  if (type == "timeout" || status == 504 || status == 408) return Error(ErrorCode::timeout, what);
  if (status >= 500) return Error(ErrorCode::backend, what);
  return Error(ErrorCode::protocol, what);
}

}  // namespace alref::backends::protocol
