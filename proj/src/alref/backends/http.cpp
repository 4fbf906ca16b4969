#include "alref/backends/http.hpp"

#include <chrono>
#include <regex>

#include <httplib.h>

#include "alref/backends/protocol.hpp"
#include "alref/core/error.hpp"

namespace alref::backends {

using nlohmann::json;

HttpTransport::HttpTransport(HttpOptions options) : options_(std::move(options)) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.endpoint, m, re)) {
    fail(ErrorCode::config, "endpoint '" + options_.endpoint + "' is not an http(s) URL");
  }
  origin_ = m[1].str();
  base_path_ = m[2].matched ? m[2].str() : "";
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (options_.timeout_seconds <= 0) fail(ErrorCode::config, "timeout must be positive");
  if (options_.retries < 0) fail(ErrorCode::config, "retries must be >= 0");
}

HttpTransport::~HttpTransport() = default;

std::unique_ptr<httplib::Client> HttpTransport::acquire() {
  {
    std::lock_guard lock(mutex_);
    if (!idle_.empty()) {
      auto c = std::move(idle_.back());
      idle_.pop_back();
      return c;
    }
  }
  auto client = std::make_unique<httplib::Client>(origin_);
  const auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  client->set_connection_timeout(micros);
  client->set_read_timeout(micros);
  client->set_write_timeout(micros);
  client->set_keep_alive(true);
  return client;
}

void HttpTransport::release(std::unique_ptr<httplib::Client> client) {
  std::lock_guard lock(mutex_);
  idle_.push_back(std::move(client));
}

json HttpTransport::post(const std::string& path, const json& body, bool require_version) {
  const std::string target = base_path_ + path;
  const std::string where = origin_ + target;
  httplib::Headers headers{{protocol::kVersionHeader, protocol::kVersion}};
  for (const auto& [k, v] : options_.headers) headers.emplace(k, v);
  const std::string payload = body.dump();

  for (int attempt = 0;; ++attempt) {
    auto client = acquire();
    const auto began = std::chrono::steady_clock::now();
    auto res = client->Post(target, headers, payload, "application/json");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - began).count();
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= options_.timeout_seconds * 0.95)) {
        fail(ErrorCode::timeout, where + " timed out after " + std::to_string(options_.timeout_seconds) + " s");
      }
      if (err == httplib::Error::Connection && attempt < options_.retries) continue;
      fail(ErrorCode::backend, where + ": transport error: " + httplib::to_string(err));
    }
    release(std::move(client));

    if (res->status < 200 || res->status >= 300) throw protocol::error_from_response(res->status, res->body, where);
    if (require_version) {
      const auto version = res->get_header_value(protocol::kVersionHeader);
      if (version != protocol::kVersion) {
        fail(ErrorCode::protocol, where + " answered with protocol version '" + version + "', expected '" +
                                      protocol::kVersion + "'");
      }
    }
    auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) fail(ErrorCode::protocol, where + " returned a body that is not JSON");
    return parsed;
  }
}

namespace {

// Decoding errors are reported against the endpoint that produced them.
template <class F>
auto decoding(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::protocol) throw;
    fail(ErrorCode::protocol, where + ": " + e.what());
  }
}

class HttpChat final : public ChatVisionBackend {
 public:
  HttpChat(std::shared_ptr<HttpTransport> t, std::string path, std::string model)
      : t_(std::move(t)), path_(std::move(path)), model_(std::move(model)) {}
  std::string chat(std::span<const Raster* const> images, const std::string& text) override {
    auto reply = t_->post(path_, protocol::chat_request(model_, images, text), false);
    return decoding(path_, [&] { return protocol::parse_chat_response(reply); });
  }

 private:
  std::shared_ptr<HttpTransport> t_;
  std::string path_;
  std::string model_;
};

class HttpGrounding final : public GroundingBackend {
 public:
  explicit HttpGrounding(std::shared_ptr<HttpTransport> t) : t_(std::move(t)) {}
  std::vector<BoundingBox> ground(const Raster& image, const std::string& phrase, double text_threshold,
                                  double box_threshold) override {
    auto reply = t_->post(protocol::path::ground,
                          protocol::ground_request(image, phrase, text_threshold, box_threshold));
    return decoding(protocol::path::ground, [&] { return protocol::parse_ground_response(reply); });
  }

 private:
  std::shared_ptr<HttpTransport> t_;
};

class HttpSegmenter final : public VideoSegmenterBackend {
 public:
  explicit HttpSegmenter(std::shared_ptr<HttpTransport> t) : t_(std::move(t)) {}
  SessionId open(const VideoClip& clip) override {
    auto reply = t_->post(protocol::path::segment_open, protocol::segment_open_request(clip));
    auto id = decoding(protocol::path::segment_open,
                       [&] { return protocol::parse_segment_open_response(reply, clip.size()); });
    std::lock_guard lock(mutex_);
    shapes_[id] = {clip.size(), clip.height(), clip.width()};
    return id;
  }
  void add_prompt(const SessionId& session, std::int64_t frame_index, const BoundingBox& box) override {
    t_->post(protocol::path::segment_prompt, protocol::segment_prompt_request(session, frame_index, box));
  }
  std::vector<BinaryMask> propagate(const SessionId& session, std::int64_t start_frame) override {
    Shape shape;
    {
      std::lock_guard lock(mutex_);
      auto it = shapes_.find(session);
      if (it == shapes_.end()) fail(ErrorCode::invalid_argument, "unknown segmenter session " + session);
      shape = it->second;
    }
    auto reply = t_->post(protocol::path::segment_propagate, protocol::segment_propagate_request(session, start_frame));
    return decoding(protocol::path::segment_propagate, [&] {
      return protocol::parse_segment_propagate_response(reply, shape.frames, shape.height, shape.width);
    });
  }
  // Server sessions expire on their own; only local bookkeeping is dropped.
  void close(const SessionId& session) override {
    std::lock_guard lock(mutex_);
    shapes_.erase(session);
  }

 private:
  struct Shape {
    std::int64_t frames = 0;
    int height = 0;
    int width = 0;
  };
  std::shared_ptr<HttpTransport> t_;
  std::mutex mutex_;
  std::map<SessionId, Shape> shapes_;
};

class HttpTagger final : public AudioTaggerBackend {
 public:
  explicit HttpTagger(std::shared_ptr<HttpTransport> t) : t_(std::move(t)) {}
  std::vector<ScoredLabel> tag_audio(const AudioClip& audio) override {
    auto reply = t_->post(protocol::path::audio_tag, protocol::audio_request(audio));
    return decoding(protocol::path::audio_tag, [&] { return protocol::parse_tag_response(reply); });
  }

 private:
  std::shared_ptr<HttpTransport> t_;
};

class HttpEmbedder final : public CrossModalEmbedderBackend {
 public:
  explicit HttpEmbedder(std::shared_ptr<HttpTransport> t) : t_(std::move(t)) {}
  EmbeddingVector embed_audio(const AudioClip& segment) override {
    auto reply = t_->post(protocol::path::embed_audio, protocol::audio_request(segment));
    return decoding(protocol::path::embed_audio, [&] { return protocol::parse_embedding_response(reply); });
  }
  EmbeddingVector embed_text(const std::string& text) override {
    auto reply = t_->post(protocol::path::embed_text, protocol::embed_text_request(text));
    return decoding(protocol::path::embed_text, [&] { return protocol::parse_embedding_response(reply); });
  }

 private:
  std::shared_ptr<HttpTransport> t_;
};

class HttpSed final : public SoundEventBackend {
 public:
  explicit HttpSed(std::shared_ptr<HttpTransport> t) : t_(std::move(t)) {}
  std::vector<double> sed_boundaries(const AudioClip& audio) override {
    auto reply = t_->post(protocol::path::sed, protocol::audio_request(audio));
    return decoding(protocol::path::sed, [&] { return protocol::parse_sed_response(reply); });
  }

 private:
  std::shared_ptr<HttpTransport> t_;
};

}  // namespace

std::shared_ptr<ChatVisionBackend> make_http_chat(std::shared_ptr<HttpTransport> transport, std::string path,
                                                  std::string model) {
  return std::make_shared<HttpChat>(std::move(transport), std::move(path), std::move(model));
}
std::shared_ptr<GroundingBackend> make_http_grounding(std::shared_ptr<HttpTransport> transport) {
  return std::make_shared<HttpGrounding>(std::move(transport));
}
std::shared_ptr<VideoSegmenterBackend> make_http_segmenter(std::shared_ptr<HttpTransport> transport) {
  return std::make_shared<HttpSegmenter>(std::move(transport));
}
std::shared_ptr<AudioTaggerBackend> make_http_tagger(std::shared_ptr<HttpTransport> transport) {
  return std::make_shared<HttpTagger>(std::move(transport));
}
std::shared_ptr<CrossModalEmbedderBackend> make_http_embedder(std::shared_ptr<HttpTransport> transport) {
  return std::make_shared<HttpEmbedder>(std::move(transport));
}
std::shared_ptr<SoundEventBackend> make_http_sed(std::shared_ptr<HttpTransport> transport) {
  return std::make_shared<HttpSed>(std::move(transport));
}

}  // namespace alref::backends
