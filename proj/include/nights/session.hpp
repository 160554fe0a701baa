#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "nights/backend.hpp"
#include "nights/chronicle.hpp"
#include "nights/errors.hpp"
#include "nights/king.hpp"
#include "nights/model.hpp"
#include "nights/storage.hpp"
#include "nights/weapons.hpp"

namespace nights {

enum class PhaseEvent { fourth_weapon, anger_exhausted, all_cards_played, close_victory, close_dawn, abandon };

const char* to_string(PhaseEvent e);

class IllegalTransition : public Error {
 public:
  IllegalTransition(Phase from, PhaseEvent event, const std::string& why = "");

  Phase from() const { return from_; }
  PhaseEvent event() const { return event_; }

 private:
  Phase from_;
  PhaseEvent event_;
};

/// The bare transition table, without session guards. nullopt = illegal.
std::optional<Phase> transition(Phase from, PhaseEvent event);

/// Applies `event` when both the table and the session guards allow it
/// (e.g. FourthWeapon needs four cards). Repeating the event that produced
/// the current Closed outcome is a no-op. Throws IllegalTransition.
Phase advance_phase(GameSession& session, PhaseEvent event);

inline constexpr std::size_t kMaxPlayerText = 2000;
inline constexpr std::size_t kSceneExcerpt = 500;
inline constexpr const char* kDefaultStyleSuffix =
    "ancient Middle-Eastern palace, oil painting, dramatic lighting";

/// Everything a turn needs besides the session itself.
struct TurnContext {
  Backend& backend;
  Storage& storage;
  const Clock& clock;
  const WeaponLexicon& lexicon;
  std::string style_suffix = kDefaultStyleSuffix;
  std::size_t transcript_budget = kDefaultTranscriptBudget;
};

struct TurnOutcome {
  KingVerdict verdict;
  std::string king_text;
  std::optional<WeaponCard> new_card;
  Phase phase = Phase::storytelling();
};

void to_json(json& j, const TurnOutcome& v);

/// Fresh Storytelling session with neutral mood.
GameSession new_session(std::string id, std::uint64_t seed, PersonaConfig persona, Timestamp now);

/// One player turn, committed atomically: on any exception `session` is
/// left exactly as it was. Throws WrongPhase, EmptyText, ValidationError,
/// BackendError, ContractError.
TurnOutcome submit_player_turn(GameSession& session, std::string_view text, TurnContext& ctx);

/// Paints `excerpt + ", " + style_suffix` and stores the PNG under images/.
/// Throws BackendError or StorageError.
SceneImageRef paint_scene(std::string_view story_excerpt, std::string_view style_suffix,
                          const std::string& image_id, std::optional<std::uint64_t> seed,
                          TurnContext& ctx);

/// Plays a card; the fourth play resolves the battle, moves to Ending and
/// generates the ending in the same commit. Strong exception guarantee.
BattlePlay play_battle_card(GameSession& session, std::string_view card_id, TurnContext& ctx);

/// Closes an Ending session (victory or dawn by battle outcome) and writes
/// the storybook; a Closed session returns its stored storybook unchanged.
/// Throws WrongPhase for live sessions.
Storybook assemble_storybook(GameSession& session, TurnContext& ctx);

struct EngineOptions {
  PersonaConfig persona;
  WeaponLexicon lexicon = default_lexicon();
  std::string style_suffix = kDefaultStyleSuffix;
  std::size_t transcript_budget = kDefaultTranscriptBudget;
};

/// Session-oriented facade used by the service and the CLI. Loads, mutates
/// and persists sessions; at most one mutation per session is in flight
/// (others get Busy).
class Engine {
 public:
  Engine(std::shared_ptr<Backend> backend, std::shared_ptr<Storage> storage,
         std::shared_ptr<const Clock> clock, EngineOptions options = {});

  GameSession create_session(std::optional<std::uint64_t> seed = std::nullopt,
                             std::optional<json> persona_overrides = std::nullopt);
  GameSession get(const std::string& id) const;
  TurnOutcome submit_turn(const std::string& id, std::string_view text);
  BattlePlay play_card(const std::string& id, const std::string& card_id);
  GameSession abandon(const std::string& id);
  Storybook close(const std::string& id, bool abandon_if_live = false);
  /// Stored storybook text; assembles it first when the session is ready.
  std::string storybook_text(const std::string& id, bool markdown);

  Backend& backend() { return *backend_; }
  Storage& storage() { return *storage_; }
  const EngineOptions& options() const { return options_; }

 private:
  class SessionLock;
  SessionLock lock(const std::string& id);
  TurnContext context();
  GameSession load(const std::string& id) const;
  void commit(GameSession& s);

  std::shared_ptr<Backend> backend_;
  std::shared_ptr<Storage> storage_;
  std::shared_ptr<const Clock> clock_;
  EngineOptions options_;

  std::mutex create_mu_;
  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

/// Session id for the n-th session created from `seed` in one data dir.
std::string session_id_for(std::uint64_t seed, std::uint32_t n);

}  // namespace nights
