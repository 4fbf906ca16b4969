#include "alref/lbru/lbru.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "alref/core/error.hpp"
#include "alref/prompting/replies.hpp"

namespace alref::lbru {
namespace {

std::vector<std::string> clean_categories(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : raw) {
    auto c = prompting::normalize_category(r);
    if (c.empty() || !seen.insert(c).second) continue;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

prompting::TemplateVars PromptBundle::vars() const {
  return {{"tags", tag_block}, {"frame_count", std::to_string(image.frame_count)}, {"k", std::to_string(k)}};
}

AudioTagList collect_audio_tags(const AudioClip& audio, backends::AudioTaggerBackend& tagger, int k) {
  require(!audio.empty(), "collect_audio_tags: empty audio");
  require(k >= 1, "collect_audio_tags: k must be >= 1");
  std::vector<backends::ScoredLabel> labels;
  try {
    labels = tagger.tag_audio(audio);
  } catch (const Error& e) {
    fail(e.code(), std::string("audio tagger failed: ") + e.what());
  }
  std::stable_sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.label < b.label;
  });
  if (static_cast<int>(labels.size()) > k) labels.resize(static_cast<std::size_t>(k));
  return AudioTagList{std::move(labels), k};
}

std::string render_tag_block(const AudioTagList& tags) {
  if (tags.tags.empty()) return "(no labels)";
  std::string out;
  for (std::size_t i = 0; i < tags.tags.size(); ++i) {
    char score[32];
    std::snprintf(score, sizeof score, "%.2f", tags.tags[i].score);
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + tags.tags[i].label + " (" + score + ")";
  }
  return out;
}

PromptBundle build_prompt_bundle(const AudioTagList& tags, symbolic::FrameGridImage grid) {
  PromptBundle bundle;
  bundle.tag_block = render_tag_block(tags);
  bundle.image = std::move(grid);
  bundle.k = tags.k;
  return bundle;
}

CategoryOutcome identify_sounding_categories(const PromptBundle& bundle, const AudioTagList& tags,
                                             prompting::LlmChannel& llm) {
  CategoryOutcome outcome;
  const prompting::LlmRequest request{"lbru", bundle.template_name, bundle.vars(), {&bundle.image.pixels}};
  auto reply = llm.ask<std::vector<std::string>>(
      request, [](const std::string& text) -> std::optional<std::vector<std::string>> {
        auto parsed = prompting::parse_string_array(text);
        if (!parsed) return std::nullopt;
        auto cleaned = clean_categories(*parsed);
        if (cleaned.empty()) return std::nullopt;
        return cleaned;
      });
  outcome.attempts = reply.attempts;

  if (reply.value) {
    outcome.set.categories = std::move(*reply.value);
  } else {
    outcome.degraded = true;
    std::vector<std::string> texts;
    for (const auto& t : tags.tags) texts.push_back(t.label);
    outcome.set.categories = clean_categories(texts);
    outcome.warnings.push_back("no usable category list after " + std::to_string(reply.attempts) +
                               " attempts; using all audio tags");
  }
  if (static_cast<int>(outcome.set.categories.size()) > tags.k) {
    outcome.warnings.push_back("LLM returned " + std::to_string(outcome.set.categories.size()) +
                               " categories; truncated to " + std::to_string(tags.k));
    outcome.set.categories.resize(static_cast<std::size_t>(tags.k));
  }
  if (auto* audit = llm.audit()) {
    audit->record({{"event", "lbru_result"},
                   {"categories", outcome.set.categories},
                   {"degraded", outcome.degraded},
                   {"attempts", outcome.attempts},
                   {"warnings", outcome.warnings}});
  }
  return outcome;
}

Reference render_reference(const std::string& category) {
  const auto b = category.find_first_not_of(" \t\r\n");
  require(b != std::string::npos, "render_reference: empty category");
  const auto e = category.find_last_not_of(" \t\r\n");
  std::string trimmed = category.substr(b, e - b + 1);
  return Reference{"the " + trimmed + " that is making sound", ReferenceSource::lbru_category, trimmed};
}

}  // namespace alref::lbru
