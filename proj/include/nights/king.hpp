#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nights/backend.hpp"
#include "nights/model.hpp"

namespace nights {

inline constexpr std::size_t kDefaultTranscriptBudget = 6000;

/// System instruction plus transcript window for one evaluation call.
struct PromptBundle {
  std::string system;
  std::string transcript;  // bounded by the character budget
  std::vector<ChatMessage> messages;

  bool operator==(const PromptBundle&) const = default;
};

/// Most recent turns that fit in `budget` code points. When older turns are
/// dropped, a single synopsis line standing in for them leads the window.
std::string transcript_window(std::span<const StoryTurn> turns,
                              std::size_t budget = kDefaultTranscriptBudget);

std::string persona_preamble(const PersonaConfig& persona);

PromptBundle build_evaluation_prompt(const PersonaConfig& persona,
                                     std::span<const StoryTurn> story_so_far,
                                     std::string_view player_text,
                                     std::size_t budget = kDefaultTranscriptBudget);

/// Lenient reader of the King's reply. Throws ContractError when no JSON
/// object with a recognizable kind exists or the object cannot be made valid.
KingVerdict parse_verdict(std::string_view raw_backend_text);

/// Canonical wire form, accepted back by parse_verdict.
std::string serialize_verdict(const KingVerdict& v);

/// True when `v` satisfies every KingVerdict invariant.
bool is_valid(const KingVerdict& v);

int apply_mood(int session_mood, const KingVerdict& verdict);

/// Follow-up turn asking the backend to fix a reply that failed validation.
std::vector<ChatMessage> repair_messages(std::vector<ChatMessage> original,
                                         std::string_view bad_reply, std::string_view error);

}  // namespace nights
