#include <doctest.h>

#include "alref/core/error.hpp"
#include "alref/lbru/lbru.hpp"
#include "testkit.hpp"

using namespace alref;
using namespace alref::lbru;
using backends::ScoredLabel;

namespace {

class FixedTagger : public backends::AudioTaggerBackend {
 public:
  explicit FixedTagger(std::vector<ScoredLabel> labels) : labels_(std::move(labels)) {}
  std::vector<ScoredLabel> tag_audio(const AudioClip&) override {
    if (fail_) alref::fail(ErrorCode::backend, "tagger down");
    return labels_;
  }
  bool fail_ = false;

 private:
  std::vector<ScoredLabel> labels_;
};

AudioClip one_second() { return AudioClip(std::vector<float>(8000, 0.1f), 8000); }

symbolic::FrameGridImage small_grid() {
  std::vector<FrameImage> frames;
  for (int i = 0; i < 4; ++i) frames.push_back({i, Raster(8, 6, static_cast<std::uint8_t>(40 * i))});
  const VideoClip clip("v", {1, 1}, std::move(frames));
  return symbolic::compose_grid(clip, {0, 1, 2, 3});
}

AudioTagList sample_tags() {
  return AudioTagList{{{"Dog", 0.9}, {"Bark", 0.8}, {"Speech", 0.4}, {"Music", 0.3}, {"Wind", 0.1}}, 5};
}

}  // namespace

TEST_CASE("the reference template is applied verbatim") {
  const std::vector<std::string> categories{
      "dog",        "cat",          "acoustic guitar", "piano",   "baby",     "man",      "woman",
      "car",        "helicopter",   "violin",          "drum",    "lion",     "horse",    "bird",
      "keyboard",   "train",        "motorcycle",      "cello",   "tabla",    "ukulele"};
  REQUIRE(categories.size() == 20);
  for (const auto& c : categories) {
    const auto r = render_reference(c);
    CHECK(r.text == "the " + c + " that is making sound");
    CHECK(r.source == ReferenceSource::lbru_category);
    CHECK(r.category == c);
  }
  CHECK(render_reference("  dog \n").text == "the dog that is making sound");
  CHECK_THROWS_AS(render_reference("   "), Error);
}

TEST_CASE("tags are sorted by confidence and cut to k") {
  FixedTagger tagger({{"b", 0.2}, {"a", 0.9}, {"d", 0.5}, {"c", 0.5}, {"e", 0.1}, {"f", 0.7}});
  const auto tags = collect_audio_tags(one_second(), tagger, 3);
  REQUIRE(tags.tags.size() == 3);
  CHECK(tags.tags[0] == ScoredLabel{"a", 0.9});
  CHECK(tags.tags[1] == ScoredLabel{"f", 0.7});
  CHECK(tags.tags[2] == ScoredLabel{"c", 0.5});
  CHECK(tags.k == 3);
  CHECK(collect_audio_tags(one_second(), tagger, 10).tags.size() == 6);
  CHECK_THROWS_AS(collect_audio_tags(one_second(), tagger, 0), Error);
  tagger.fail_ = true;
  CHECK_THROWS_AS(collect_audio_tags(one_second(), tagger, 3), Error);
}

TEST_CASE("tag block rendering") {
  CHECK(render_tag_block(sample_tags()) ==
        "1. Dog (0.90)\n2. Bark (0.80)\n3. Speech (0.40)\n4. Music (0.30)\n5. Wind (0.10)");
  CHECK(render_tag_block(AudioTagList{{}, 5}) == "(no labels)");
}

TEST_CASE("categories come from the final JSON array") {
  const auto lib = prompting::PromptLibrary::builtin();
  testkit::FakeChat chat({"Visible: a dog.\n```json\n[\"Dog\", \" dog \", \"Acoustic  Guitar\"]\n```"});
  prompting::AuditLog audit;
  prompting::LlmChannel ch(chat, lib, &audit, nullptr, 3);
  const auto tags = sample_tags();
  const auto out = identify_sounding_categories(build_prompt_bundle(tags, small_grid()), tags, ch);
  CHECK(out.set.categories == std::vector<std::string>{"dog", "acoustic guitar"});
  CHECK_FALSE(out.degraded);
  CHECK(out.attempts == 1);
  const auto prompt = chat.prompts().at(0);
  CHECK(prompt.find(render_tag_block(tags)) != std::string::npos);
  CHECK(prompt.find("tiles 4 frames") != std::string::npos);
  CHECK(prompt.find("at most 5 categories") != std::string::npos);
  CHECK(chat.image_counts() == std::vector<std::size_t>{1});
  const auto result = audit.events_of("lbru_result");
  REQUIRE(result.size() == 1);
  CHECK(result[0]["degraded"] == false);
}

TEST_CASE("unparseable replies degrade after exactly three attempts") {
  const auto lib = prompting::PromptLibrary::builtin();
  for (const auto& bad : std::vector<std::string>{"", "I hear a dog.", "[1, 2]", "[\"\", \"  \"]", "!timeout"}) {
    CAPTURE(bad);
    testkit::FakeChat chat({bad});
    prompting::LlmChannel ch(chat, lib, nullptr, nullptr, 3);
    const auto tags = sample_tags();
    const auto out = identify_sounding_categories(build_prompt_bundle(tags, small_grid()), tags, ch);
    CHECK(chat.calls() == 3);
    CHECK(out.attempts == 3);
    CHECK(out.degraded);
    CHECK(out.set.categories == std::vector<std::string>{"dog", "bark", "speech", "music", "wind"});
    CHECK(out.warnings.size() == 1);
  }
}

TEST_CASE("a late good reply is accepted") {
  const auto lib = prompting::PromptLibrary::builtin();
  testkit::FakeChat chat({"hmm", "[\"dog\"]"});
  prompting::LlmChannel ch(chat, lib, nullptr, nullptr, 3);
  const auto tags = sample_tags();
  const auto out = identify_sounding_categories(build_prompt_bundle(tags, small_grid()), tags, ch);
  CHECK(out.set.categories == std::vector<std::string>{"dog"});
  CHECK(out.attempts == 2);
  CHECK_FALSE(out.degraded);
}

TEST_CASE("too many categories are truncated to k") {
  const auto lib = prompting::PromptLibrary::builtin();
  testkit::FakeChat chat({"[\"a\", \"b\", \"c\", \"d\"]"});
  prompting::LlmChannel ch(chat, lib, nullptr, nullptr, 3);
  AudioTagList tags{{{"x", 0.5}, {"y", 0.4}}, 2};
  const auto out = identify_sounding_categories(build_prompt_bundle(tags, small_grid()), tags, ch);
  CHECK(out.set.categories == std::vector<std::string>{"a", "b"});
  CHECK(out.warnings.size() == 1);
}
