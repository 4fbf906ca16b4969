#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace alref::prompting {

/// Last well-formed JSON array of strings in `reply`.
std::optional<std::vector<std::string>> parse_string_array(std::string_view reply);

struct ChoiceAnswer {
  int value = 0;           // the number the model chose, as written
  std::string rationale;   // reply text with the final JSON answer removed
  std::string event;       // "event" field of the JSON answer, when present
};

// Reads the model's numeric choice for `key` ("frame" or "box"): the last JSON
// object carrying an integer `key`, else the last free-text "<key> N" mention.
std::optional<ChoiceAnswer> parse_choice(std::string_view reply, std::string_view key);

/// Lowercased, trimmed, internal whitespace collapsed.
std::string normalize_category(std::string_view text);

void to_json(nlohmann::json& j, const ChoiceAnswer& a);

}  // namespace alref::prompting
