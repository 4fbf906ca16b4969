#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "alref/backends/factory.hpp"
#include "alref/backends/http.hpp"
#include "alref/backends/protocol.hpp"
#include "alref/core/error.hpp"
#include "testkit.hpp"

using namespace alref;
using namespace alref::backends;
namespace proto = alref::backends::protocol;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::invalid_argument;
}

const char* kScenario = R"({
  "strict": false,
  "ground": [{"match": {"contains": "dog"},
              "boxes": [{"x_min": 1, "y_min": 2, "x_max": 9, "y_max": 7, "score": 0.8, "label": "dog"}]}],
  "audio_tag": [{"labels": [{"label": "Dog", "score": 0.9}, {"label": "Bark", "score": 0.4}]}],
  "embed_audio": [{"embedding": [0.25, -1.0]}],
  "embed_text": [{"embedding": [1.0, 0.5]}],
  "sed": [{"boundaries": [0.5, 1.25]}]})";

BackendSet stub_backends(std::vector<std::string> chat_replies = {"hello"}) {
  auto set = scripted_backends(ScriptedScenario::parse(json::parse(kScenario)));
  set.chat = std::make_shared<testkit::FakeChat>(std::move(chat_replies));
  set.segmenter = std::make_shared<BoxFillSegmenter>();
  return set;
}

testkit::StubOptions stub_opts(BackendSet set) {
  testkit::StubOptions o;
  o.backends = std::move(set);
  return o;
}

std::shared_ptr<HttpTransport> transport(const std::string& url, double timeout = 10.0, int retries = 2) {
  return std::make_shared<HttpTransport>(HttpOptions{url, timeout, retries, {}});
}

Raster checker(int w, int h) {
  Raster r(w, h);
  for (std::size_t i = 0; i < r.rgb.size(); ++i) r.rgb[i] = static_cast<std::uint8_t>(i * 37);
  return r;
}

VideoClip small_clip(int frames) {
  std::vector<FrameImage> out;
  for (int i = 0; i < frames; ++i) out.push_back({i, checker(12, 8)});
  return VideoClip("clip", {30000, 1001}, std::move(out));
}

}  // namespace

TEST_CASE("every backend kind round-trips through the wire") {
  testkit::StubServer stub(stub_opts(stub_backends()));
  auto t = transport(stub.url());

  const auto boxes = make_http_grounding(t)->ground(checker(10, 8), "the dog", 0.2, 0.15);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == BoundingBox{1, 2, 9, 7, 0.8, "dog"});
  CHECK(make_http_grounding(t)->ground(checker(10, 8), "a cat", 0.2, 0.15).empty());

  const AudioClip audio({0.f, 0.5f, -0.5f, 1.f}, 16000);
  CHECK(make_http_tagger(t)->tag_audio(audio) == std::vector<ScoredLabel>{{"Dog", 0.9}, {"Bark", 0.4}});
  auto emb = make_http_embedder(t);
  CHECK(emb->embed_audio(audio).values == std::vector<double>{0.25, -1.0});
  CHECK(emb->embed_text("dog").values == std::vector<double>{1.0, 0.5});
  CHECK(make_http_sed(t)->sed_boundaries(audio) == std::vector<double>{0.5, 1.25});

  const auto img = checker(5, 4);
  const std::vector<const Raster*> images{&img, &img};
  CHECK(make_http_chat(t, proto::path::chat, "gpt-4")->chat(images, "which?") == "hello");

  const auto reqs = stub.requests();
  REQUIRE(reqs.size() == 7);
  for (const auto& r : reqs) CHECK(r.version_header == proto::kVersion);
  CHECK(reqs[0].body["phrase"] == "the dog");
  CHECK(reqs[0].body["text_threshold"] == 0.2);
  CHECK(proto::decode_image(reqs[0].body["image"]) == checker(10, 8));
  const auto sent = proto::decode_audio(reqs[2].body["audio"]).samples();
  REQUIRE(sent.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(sent[i] - audio.samples()[i]) <= 0.5f / 32767.0f);
  CHECK(reqs[6].body["model"] == "gpt-4");
  CHECK(proto::parse_chat_request(reqs[6].body).images.size() == 2);
}

TEST_CASE("segmenter sessions over http") {
  testkit::StubServer stub(stub_opts(stub_backends()));
  auto seg = make_http_segmenter(transport(stub.url()));
  const auto clip = small_clip(5);
  const BoundingBox a{0, 0, 4, 3, 0.5, ""}, b{6, 2, 12, 8, 0.5, ""};
  const auto out = segment_video(*seg, clip, {{1, a}, {3, b}}, 1, Reference::from_text("x"));
  REQUIRE(out.masks.size() == 5);
  CHECK(out.masks[0] == box_mask(a, 8, 12));
  CHECK(out.masks[2] == box_mask(a, 8, 12));
  CHECK(out.masks[4] == box_mask(b, 8, 12));
  CHECK(stub.count(proto::path::segment_open) == 1);
  CHECK(stub.count(proto::path::segment_prompt) == 2);
  CHECK(stub.count(proto::path::segment_propagate) == 1);
  const auto open = stub.requests()[0].body;
  CHECK(open["fps"] == json::array({30000, 1001}));
  CHECK(open["frames"].size() == 5);

  // Unknown sessions are rejected before any request is made.
  CHECK(code_of([&] { seg->propagate("nope", 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("status codes map to error codes") {
  struct Case {
    int status;
    std::string body;
    ErrorCode expect;
  };
  const std::vector<Case> cases{
      {504, "gateway", ErrorCode::timeout},
      {408, "", ErrorCode::timeout},
      {503, proto::error_body("timeout", "busy").dump(), ErrorCode::timeout},
      {500, proto::error_body("backend", "oom").dump(), ErrorCode::backend},
      {502, "bad gateway", ErrorCode::backend},
      {400, proto::error_body("invalid_request", "no phrase").dump(), ErrorCode::protocol},
      {404, "missing", ErrorCode::protocol},
      {200, "not json", ErrorCode::protocol},
      {200, R"({"boxes": {}})", ErrorCode::protocol},
  };
  for (const auto& c : cases) {
    CAPTURE(c.status);
    CAPTURE(c.body);
    auto opts = stub_opts(stub_backends());
    opts.inject = [c](const std::string&, int) { return std::make_optional(std::make_pair(c.status, c.body)); };
    testkit::StubServer stub(opts);
    auto g = make_http_grounding(transport(stub.url()));
    CHECK(code_of([&] { g->ground(checker(4, 4), "dog", 0.2, 0.2); }) == c.expect);
    CHECK(stub.count(proto::path::ground) == 1);  // HTTP replies are never retried here
  }
}

TEST_CASE("error messages name the endpoint") {
  auto opts = stub_opts(stub_backends());
  opts.inject = [](const std::string&, int) { return std::make_optional(std::make_pair(200, std::string(R"({"boxes": 3})"))); };
  testkit::StubServer stub(opts);
  try {
    make_http_grounding(transport(stub.url()))->ground(checker(4, 4), "dog", 0.2, 0.2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(proto::path::ground) != std::string::npos);
  }
}

TEST_CASE("server-side validation failures come back as protocol errors") {
  testkit::StubServer stub(stub_opts(stub_backends()));
  auto t = transport(stub.url());
  CHECK(code_of([&] { t->post(proto::path::ground, json{{"phrase", "x"}}); }) == ErrorCode::protocol);
  CHECK(code_of([&] { t->post("/v1/unknown", json::object()); }) == ErrorCode::protocol);
}

TEST_CASE("the protocol version header is required except for chat") {
  auto opts = stub_opts(stub_backends({"fine"}));
  opts.version_header = false;
  testkit::StubServer stub(opts);
  auto t = transport(stub.url());
  CHECK(code_of([&] { make_http_grounding(t)->ground(checker(4, 4), "dog", 0.2, 0.2); }) == ErrorCode::protocol);
  CHECK(code_of([&] { make_http_sed(t)->sed_boundaries(AudioClip({0.f}, 8000)); }) == ErrorCode::protocol);
  const std::vector<const Raster*> none;
  CHECK(make_http_chat(t, proto::path::chat, "m")->chat(none, "hi") == "fine");
}

TEST_CASE("slow replies time out") {
  auto opts = stub_opts(stub_backends());
  opts.delay_seconds = 1.0;
  testkit::StubServer stub(opts);
  auto g = make_http_grounding(transport(stub.url(), 0.25));
  CHECK(code_of([&] { g->ground(checker(4, 4), "dog", 0.2, 0.2); }) == ErrorCode::timeout);
  CHECK(stub.count(proto::path::ground) == 1);
}

TEST_CASE("refused connections are retried then reported as backend errors") {
  int port = 0;
  {
    testkit::StubServer gone(stub_opts(stub_backends()));
    port = gone.port();
  }
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  for (int retries : {0, 2}) {
    auto g = make_http_grounding(transport(url, 2.0, retries));
    CHECK(code_of([&] { g->ground(checker(4, 4), "dog", 0.2, 0.2); }) == ErrorCode::backend);
  }
}

TEST_CASE("endpoint validation") {
  CHECK(code_of([] { HttpTransport({"ftp://x", 1, 0, {}}); }) == ErrorCode::config);
  CHECK(code_of([] { HttpTransport({"localhost:80", 1, 0, {}}); }) == ErrorCode::config);
  CHECK(code_of([] { HttpTransport({"http://x", 0, 0, {}}); }) == ErrorCode::config);
  CHECK(code_of([] { HttpTransport({"http://x", 1, -1, {}}); }) == ErrorCode::config);
  CHECK(HttpTransport({"http://127.0.0.1:8080/api/", 1, 0, {}}).base_url() == "http://127.0.0.1:8080");
}

TEST_CASE("a base path prefixes every route") {
  auto opts = stub_opts(stub_backends());
  opts.prefix = "/models/v";
  testkit::StubServer stub(opts);
  CHECK(stub.url().ends_with("/models/v"));
  auto t = transport(stub.url() + "/");
  CHECK(make_http_sed(t)->sed_boundaries(AudioClip({0.f}, 8000)) == std::vector<double>{0.5, 1.25});
  // Without the prefix the route does not exist.
  auto bare = transport("http://127.0.0.1:" + std::to_string(stub.port()));
  CHECK(code_of([&] { make_http_sed(bare)->sed_boundaries(AudioClip({0.f}, 8000)); }) == ErrorCode::protocol);
}

TEST_CASE("the provider sends the chat bearer token only to chat") {
  testkit::StubServer stub(stub_opts(stub_backends({"ok"})));
  ::setenv("ALREF_TEST_KEY", "s3cret", 1);
  BackendProvider provider(parse_backend_config(json{
      {"default", stub.url()},
      {"chat_vision", {{"endpoint", stub.url()}, {"api_key_env", "ALREF_TEST_KEY"}, {"model", "vision-x"}}}}));
  CHECK_FALSE(provider.needs_truth());
  const auto set = provider.for_sample("v/0");
  const std::vector<const Raster*> none;
  CHECK(set.chat->chat(none, "q") == "ok");
  CHECK(set.sed->sed_boundaries(AudioClip({0.f}, 8000)) == std::vector<double>{0.5, 1.25});
  const auto reqs = stub.requests();
  REQUIRE(reqs.size() == 2);
  CHECK(reqs[0].authorization == "Bearer s3cret");
  CHECK(reqs[0].body["model"] == "vision-x");
  CHECK(reqs[1].authorization.empty());
  ::unsetenv("ALREF_TEST_KEY");
}

TEST_CASE("a shared transport serves concurrent callers") {
  testkit::StubServer stub(stub_opts(stub_backends()));
  auto t = transport(stub.url());
  std::atomic<int> ok{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] {
      auto g = make_http_grounding(t);
      for (int k = 0; k < 5; ++k)
        if (g->ground(checker(6, 6), "dog", 0.2, 0.2).size() == 1) ++ok;
    });
  }
  for (auto& th : threads) th.join();
  CHECK(ok == 30);
  CHECK(stub.count(proto::path::ground) == 30);
}
