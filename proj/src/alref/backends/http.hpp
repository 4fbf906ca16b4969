#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alref/backends/interfaces.hpp"

namespace httplib {
class Client;
}

namespace alref::backends {

struct HttpOptions {
  std::string endpoint;  // scheme://host[:port][/base-path]
  double timeout_seconds = 60.0;
  int retries = 2;       // extra attempts, only when the connection could not be made
  std::map<std::string, std::string> headers;
};

// POSTs JSON and returns the decoded reply. Connection failures are retried;
// timeouts raise ErrorCode::timeout; non-2xx replies raise the error typed by
// the response body. Clients are pooled so one transport may be shared.
class HttpTransport {
 public:
  explicit HttpTransport(HttpOptions options);
  ~HttpTransport();

  nlohmann::json post(const std::string& path, const nlohmann::json& body, bool require_version = true);

  const std::string& base_url() const { return origin_; }

 private:
  std::unique_ptr<httplib::Client> acquire();
  void release(std::unique_ptr<httplib::Client> client);

  HttpOptions options_;
  std::string origin_;
  std::string base_path_;
  std::mutex mutex_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

std::shared_ptr<ChatVisionBackend> make_http_chat(std::shared_ptr<HttpTransport> transport, std::string path,
                                                  std::string model);
std::shared_ptr<GroundingBackend> make_http_grounding(std::shared_ptr<HttpTransport> transport);
std::shared_ptr<VideoSegmenterBackend> make_http_segmenter(std::shared_ptr<HttpTransport> transport);
std::shared_ptr<AudioTaggerBackend> make_http_tagger(std::shared_ptr<HttpTransport> transport);
std::shared_ptr<CrossModalEmbedderBackend> make_http_embedder(std::shared_ptr<HttpTransport> transport);
std::shared_ptr<SoundEventBackend> make_http_sed(std::shared_ptr<HttpTransport> transport);

}  // namespace alref::backends
