#include "nights/king.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "nights/errors.hpp"
#include "nights/structured.hpp"

namespace nights {

namespace {

constexpr std::size_t kSynopsisMax = 420;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::string format_turn(const StoryTurn& t) {
  if (t.author == Author::king) return "King: " + t.text;
  return std::string(t.rejected ? "Storyteller (refused by the King): " : "Storyteller: ") + t.text;
}

std::string first_sentence(std::string_view text) {
  text = trim(text);
  const auto cut = text.find_first_of(".!?");
  return std::string(cut == std::string_view::npos ? text : text.substr(0, cut + 1));
}

std::string synopsis_line(std::span<const StoryTurn> dropped, std::size_t limit) {
  std::string line =
      "[Synopsis of " + std::to_string(dropped.size()) + " earlier turns] ";
  for (const auto& t : dropped) {
    if (t.author == Author::king || !t.rejected) {
      std::string s = first_sentence(t.text);
      if (!s.empty()) line += s + " ";
    }
    if (utf8_length(line) > limit) break;
  }
  line = std::string(trim(line));
  if (utf8_length(line) > limit) line = utf8_truncate(line, limit - 1) + "…";
  return line;
}

// Letters only, lowercased: "Angry_Correct" -> "angrycorrect".
std::string normalize_kind(std::string_view raw) {
  std::string out;
  for (unsigned char c : raw) {
    if (std::isalpha(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::optional<VerdictKind> recognize_kind(const json& obj) {
  const auto it = obj.find("kind");
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  const std::string k = normalize_kind(it->get<std::string>());
  if (k == "continue") return VerdictKind::continue_story;
  if (k == "rephrase") return VerdictKind::rephrase;
  if (k == "angry" || k == "angrycorrect") return VerdictKind::angry;
  return std::nullopt;
}

bool has_continuation(const json& obj) {
  const auto it = obj.find("continuation");
  return it != obj.end() && it->is_string() && !trim(it->get_ref<const std::string&>()).empty();
}

int default_delta(VerdictKind k) {
  switch (k) {
    case VerdictKind::continue_story: return 5;
    case VerdictKind::rephrase: return -5;
    case VerdictKind::angry: return -10;
  }
  return 0;
}

const char* default_comment(VerdictKind k) {
  switch (k) {
    case VerdictKind::continue_story: return "Hmm. Go on.";
    case VerdictKind::rephrase: return "Say that again, and say it properly.";
    case VerdictKind::angry: return "Enough of this nonsense!";
  }
  return "";
}

int read_delta(const json& obj, VerdictKind kind) {
  const auto it = obj.find("mood_delta");
  int delta = default_delta(kind);
  if (it != obj.end()) {
    if (it->is_number_integer()) {
      // Unsigned values above INT64_MAX land here too; clamp via long double.
      const long double v = it->is_number_unsigned()
                                ? static_cast<long double>(it->get<std::uint64_t>())
                                : static_cast<long double>(it->get<std::int64_t>());
      delta = static_cast<int>(std::clamp<long double>(v, KingVerdict::kMinDelta,
                                                       KingVerdict::kMaxDelta));
    } else if (it->is_number_float() && std::isfinite(it->get<double>())) {
      delta = static_cast<int>(std::clamp(std::round(it->get<double>()),
                                          double{KingVerdict::kMinDelta},
                                          double{KingVerdict::kMaxDelta}));
    }
  }
  delta = std::clamp(delta, KingVerdict::kMinDelta, KingVerdict::kMaxDelta);
  if (kind == VerdictKind::angry && delta >= 0) delta = default_delta(VerdictKind::angry);
  return delta;
}

}  // namespace

std::string transcript_window(std::span<const StoryTurn> turns, std::size_t budget) {
  std::vector<std::string> lines;
  lines.reserve(turns.size());
  std::size_t total = 0;
  for (const auto& t : turns) {
    lines.push_back(format_turn(t));
    total += utf8_length(lines.back()) + 1;
  }
  auto join_from = [&](std::size_t first) {
    std::string out;
    for (std::size_t i = first; i < lines.size(); ++i) {
      if (!out.empty()) out += '\n';
      out += lines[i];
    }
    return out;
  };
  if (total <= budget + 1) return join_from(0);

  const std::size_t synopsis_room = std::min(kSynopsisMax, budget);
  std::size_t used = 0;
  std::size_t first = lines.size();
  while (first > 0) {
    const std::size_t cost = utf8_length(lines[first - 1]) + 1;
    if (synopsis_room + used + cost > budget) break;
    used += cost;
    --first;
  }
  std::string window = synopsis_line(turns.first(first), synopsis_room);
  if (first < lines.size()) window += '\n' + join_from(first);
  return window;
}

std::string persona_preamble(const PersonaConfig& persona) {
  std::string s;
  s += "You are King " + persona.name + ", ruler of an ancient realm. A storyteller must tell you ";
  s += "a tale night after night, taking turns with you to continue it.\n";
  s += "Your character: " + join(persona.traits) + ".\n";
  s += "Stories about " + join(persona.likes) + " delight you.\n";
  s += "You despise " + join(persona.rejects) + "; modern words sound like nonsense to you.\n";
  s += "Style: " + persona.style_note + "\n";
  return s;
}

PromptBundle build_evaluation_prompt(const PersonaConfig& persona,
                                     std::span<const StoryTurn> story_so_far,
                                     std::string_view player_text, std::size_t budget) {
  PromptBundle bundle;
  bundle.system = persona_preamble(persona);
  bundle.system +=
      "\nJudge the storyteller's newest passage against the story so far, your own tastes and "
      "the ancient setting. You are generally open to the story. If it follows logically and "
      "pleases you, continue the narrative yourself. If it drifts or is clumsy, ask for a "
      "rephrase or a correction of its direction. Become angry only when it clearly "
      "contradicts the context, for example random characters or many modern terms.\n"
      "\nReply with one JSON object and nothing else:\n"
      "{\"kind\": \"continue\" | \"rephrase\" | \"angry\",\n"
      " \"comment\": \"your in-character reaction, one line\",\n"
      " \"continuation\": \"your continuation of the tale (only when kind is continue)\",\n"
      " \"mood_delta\": integer from -20 to 10 (negative when displeased)}\n";
  bundle.transcript = transcript_window(story_so_far, budget);

  if (!bundle.transcript.empty()) {
    bundle.messages.push_back({"user", "The story so far:\n" + bundle.transcript});
  } else {
    bundle.messages.push_back({"user", "The story so far: (the tale has just begun)"});
  }
  bundle.messages.push_back({"user", std::string(player_text)});
  return bundle;
}

bool is_valid(const KingVerdict& v) {
  if (v.mood_delta < KingVerdict::kMinDelta || v.mood_delta > KingVerdict::kMaxDelta) return false;
  if (v.comment.empty()) return false;
  const bool continues = v.kind == VerdictKind::continue_story;
  const bool has_text = v.continuation.has_value() && !trim(*v.continuation).empty();
  if (continues != has_text) return false;
  if (!continues && v.continuation.has_value()) return false;
  if (v.kind == VerdictKind::angry && v.mood_delta >= 0) return false;
  return true;
}

KingVerdict parse_verdict(std::string_view raw) {
  const auto usable = [](const json& obj) {
    const auto kind = recognize_kind(obj);
    return kind && (*kind != VerdictKind::continue_story || has_continuation(obj));
  };
  const auto obj = extract_json_object(raw, usable);
  if (!obj) {
    if (extract_json_object(raw, [](const json& o) { return recognize_kind(o).has_value(); })) {
      throw ContractError("continuation must be a non-empty string when kind is continue");
    }
    throw ContractError(
        "reply must contain a JSON object whose kind is continue, rephrase or angry");
  }

  KingVerdict v;
  v.kind = *recognize_kind(*obj);
  const auto comment = obj->find("comment");
  if (comment != obj->end() && comment->is_string() && !comment->get<std::string>().empty()) {
    v.comment = comment->get<std::string>();
  } else {
    v.comment = default_comment(v.kind);
  }
  if (v.kind == VerdictKind::continue_story) v.continuation = obj->at("continuation").get<std::string>();
  v.mood_delta = read_delta(*obj, v.kind);
  return v;
}

std::string serialize_verdict(const KingVerdict& v) {
  return json(v).dump(-1, ' ', false, json::error_handler_t::replace);
}

int apply_mood(int session_mood, const KingVerdict& verdict) {
  return std::clamp(session_mood + verdict.mood_delta, 0, 100);
}

std::vector<ChatMessage> repair_messages(std::vector<ChatMessage> original,
                                         std::string_view bad_reply, std::string_view error) {
  original.push_back({"assistant", std::string(bad_reply)});
  original.push_back({"user", "Your previous reply was rejected: " + std::string(error) +
                                  ". Answer again with a single JSON object that has exactly "
                                  "the required fields."});
  return original;
}

}  // namespace nights
