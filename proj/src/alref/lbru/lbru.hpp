#pragma once

#include <string>
#include <vector>

#include "alref/backends/interfaces.hpp"
#include "alref/core/audio.hpp"
#include "alref/core/types.hpp"
#include "alref/prompting/llm_channel.hpp"
#include "alref/symbolic/symbolic.hpp"

namespace alref::lbru {

inline constexpr const char* kCategoryTemplate = "lbru_categories";

/// Top-k tagger labels, confidence descending.
struct AudioTagList {
  std::vector<backends::ScoredLabel> tags;
  int k = 5;
};

struct SoundingCategorySet {
  std::vector<std::string> categories;
};

// The symbolic prompt: command template, rendered tag list and frame grid.
struct PromptBundle {
  std::string template_name = kCategoryTemplate;
  std::string tag_block;
  symbolic::FrameGridImage image;
  int k = 5;

  prompting::TemplateVars vars() const;
};

struct CategoryOutcome {
  SoundingCategorySet set;
  bool degraded = false;
  int attempts = 0;
  std::vector<std::string> warnings;
};

AudioTagList collect_audio_tags(const AudioClip& audio, backends::AudioTaggerBackend& tagger, int k);

std::string render_tag_block(const AudioTagList& tags);

PromptBundle build_prompt_bundle(const AudioTagList& tags, symbolic::FrameGridImage grid);

/// Asks the LLM which tags are produced by visible objects. Falls back to all
/// tag texts (degraded) when no attempt yields a usable category list.
CategoryOutcome identify_sounding_categories(const PromptBundle& bundle, const AudioTagList& tags,
                                             prompting::LlmChannel& llm);

/// "the <category> that is making sound"
Reference render_reference(const std::string& category);

}  // namespace alref::lbru
