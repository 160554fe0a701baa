#pragma once

#include <string>

#include "nights/backend.hpp"
#include "nights/model.hpp"

namespace nights {

inline constexpr const char* kStorytellerName = "Shahrzad";

/// Immutable record of a finished playthrough.
struct Storybook {
  std::string session_id;
  std::uint64_t seed = 0;
  Timestamp created_at{};
  std::string persona_name;
  std::vector<StoryTurn> turns;
  std::vector<WeaponCard> weapons;
  std::optional<BattleState> battle;
  std::optional<EndingChronicle> ending;
  /// "victory" | "defeat" | "dawn" | "abandoned"
  std::string outcome;

  bool operator==(const Storybook&) const = default;
};

void to_json(json& j, const Storybook& v);
void from_json(const json& j, Storybook& v);

/// Label for a closed session: a lost battle reads "defeat", an anger
/// ending "dawn".
std::string outcome_label(const GameSession& session);

/// Checks a parsed ending reply; throws ContractError naming the first
/// broken rule (e.g. "actions must have length 4").
EndingChronicle parse_ending(std::string_view raw);

GenerationRequest ending_request(const GameSession& session);

/// Deterministic ending built from the battle log alone.
EndingChronicle template_ending(const GameSession& session);

/// Requires phase Ending with a resolved battle (WrongPhase otherwise).
/// Never fails past that: a second ContractError or any BackendError falls
/// back to template_ending.
EndingChronicle generate_ending(const GameSession& session, Backend& backend);

/// Requires a Closed session; throws WrongPhase.
Storybook make_storybook(const GameSession& session, Timestamp created_at);

/// Canonical key-sorted JSON, newline-terminated.
std::string storybook_json(const Storybook& book);
Storybook parse_storybook(std::string_view text);
std::string render_markdown(const Storybook& book);

}  // namespace nights
