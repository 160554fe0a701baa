#include "nights/structured.hpp"

namespace nights {

namespace {

// Index one past the '}' closing the object opened at `start`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<json> extract_json_object(std::string_view raw,
                                        const std::function<bool(const json&)>& accept) {
  if (raw.size() > kMaxRawBytes) raw = raw.substr(0, kMaxRawBytes);
  std::size_t attempts = 0;
  std::size_t pos = raw.find('{');
  while (pos != std::string_view::npos && attempts < kMaxCandidates) {
    const std::size_t end = balanced_end(raw, pos);
    ++attempts;
    if (end == std::string_view::npos) {
      // Unterminated here; a later brace may still open a complete object.
      pos = raw.find('{', pos + 1);
      continue;
    }
    json parsed = json::parse(raw.substr(pos, end - pos), nullptr, /*allow_exceptions=*/false);
    if (parsed.is_object() && accept(parsed)) return parsed;
    pos = raw.find('{', pos + 1);
  }
  return std::nullopt;
}

}  // namespace nights
