#include "alref/prompting/replies.hpp"

#include <cctype>
#include <regex>

namespace alref::prompting {
namespace {

// End (exclusive) of the bracketed value starting at `open`, honouring JSON
// string literals, or npos when unbalanced.
std::size_t matching_close(std::string_view s, std::size_t open) {
  const char open_ch = s[open];
  const char close_ch = open_ch == '[' ? ']' : '}';
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == open_ch) {
      ++depth;
    } else if (c == close_ch) {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

struct JsonSpan {
  nlohmann::json value;
  std::size_t begin = 0;
  std::size_t end = 0;
};

template <class Accept>
std::optional<JsonSpan> last_json(std::string_view reply, char open_ch, Accept accept) {
  for (std::size_t i = reply.size(); i-- > 0;) {
    if (reply[i] != open_ch) continue;
    const auto end = matching_close(reply, i);
    if (end == std::string_view::npos) continue;
    auto value = nlohmann::json::parse(reply.substr(i, end - i), nullptr, false);
    if (value.is_discarded() || !accept(value)) continue;
    return JsonSpan{std::move(value), i, end};
  }
  return std::nullopt;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Drops the JSON answer together with an enclosing ``` fence, if any.
std::string strip_answer(std::string_view reply, std::size_t begin, std::size_t end) {
  std::size_t cut_begin = begin;
  std::size_t cut_end = end;
  const auto fence_open = reply.rfind("```", begin);
  if (fence_open != std::string_view::npos) {
    const auto between = reply.substr(fence_open + 3, begin - fence_open - 3);
    const auto tag = trim(between);
    if (tag.empty() || tag == "json") {
      const auto fence_close = reply.find("```", end);
      if (fence_close != std::string_view::npos && trim(reply.substr(end, fence_close - end)).empty()) {
        cut_begin = fence_open;
        cut_end = fence_close + 3;
      }
    }
  }
  std::string out(reply.substr(0, cut_begin));
  out += reply.substr(cut_end);
  return trim(out);
}

std::optional<int> integer_field(const nlohmann::json& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) return std::nullopt;
  if (it->is_number_integer()) return it->get<int>();
  if (it->is_number_float()) {
    const double d = it->get<double>();
    if (d == static_cast<int>(d)) return static_cast<int>(d);
    return std::nullopt;
  }
  if (it->is_string()) {
    static const std::regex kDigits(R"(\s*#?\s*(\d{1,6})\s*)");
    std::smatch m;
    const auto s = it->get<std::string>();
    if (std::regex_match(s, m, kDigits)) return std::stoi(m[1].str());
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<std::string>> parse_string_array(std::string_view reply) {
  auto found = last_json(reply, '[', [](const nlohmann::json& v) {
    if (!v.is_array()) return false;
    for (const auto& e : v) {
      if (!e.is_string()) return false;
    }
    return true;
  });
  if (!found) return std::nullopt;
  return found->value.get<std::vector<std::string>>();
}

std::optional<ChoiceAnswer> parse_choice(std::string_view reply, std::string_view key) {
  auto found = last_json(reply, '{', [&](const nlohmann::json& v) {
    return v.is_object() && integer_field(v, key).has_value();
  });
  if (found) {
    ChoiceAnswer a;
    a.value = *integer_field(found->value, key);
    a.rationale = strip_answer(reply, found->begin, found->end);
    if (auto ev = found->value.find("event"); ev != found->value.end() && ev->is_string()) {
      a.event = ev->get<std::string>();
    }
    return a;
  }
  const std::regex mention("\\b" + std::string(key) + R"(\s*(?:id|ID|Id|no\.?|number|#)?\s*[:#]?\s*(\d{1,6})\b)",
                           std::regex::icase);
  std::optional<ChoiceAnswer> last;
  const std::string text(reply);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), mention); it != std::sregex_iterator(); ++it) {
    ChoiceAnswer a;
    a.value = std::stoi((*it)[1].str());
    a.rationale = trim(text);
    last = a;
  }
  return last;
}

std::string normalize_category(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void to_json(nlohmann::json& j, const ChoiceAnswer& a) {
  j = nlohmann::json{{"value", a.value}, {"rationale", a.rationale}};
  if (!a.event.empty()) j["event"] = a.event;
}

}  // namespace alref::prompting
