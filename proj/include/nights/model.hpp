#pragma once

// Plain data carried by a game session, with its JSON form. Behavior lives
// in the module headers (king.hpp, weapons.hpp, battle.hpp, chronicle.hpp,
// session.hpp).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nights/backend.hpp"
#include "nights/util.hpp"

namespace nights {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kWeaponSlots = 4;
inline constexpr int kNeutralMood = 50;

enum class Outcome { victory, dawn, abandoned };

/// Storytelling | Battle | Ending | Closed(outcome)
class Phase {
 public:
  enum class Stage { storytelling, battle, ending, closed };

  static Phase storytelling() { return Phase(Stage::storytelling, std::nullopt); }
  static Phase battle() { return Phase(Stage::battle, std::nullopt); }
  static Phase ending() { return Phase(Stage::ending, std::nullopt); }
  static Phase closed(Outcome o) { return Phase(Stage::closed, o); }

  Stage stage() const { return stage_; }
  bool is_closed() const { return stage_ == Stage::closed; }
  /// Present only for Closed.
  std::optional<Outcome> outcome() const { return outcome_; }

  bool operator==(const Phase&) const = default;

 private:
  Phase(Stage s, std::optional<Outcome> o) : stage_(s), outcome_(o) {}
  Stage stage_;
  std::optional<Outcome> outcome_;
};

/// "storytelling", "battle", "ending", "closed:victory", ...
std::string to_string(Phase p);
std::string to_string(Outcome o);
Phase phase_from_string(const std::string& s);

struct PersonaConfig {
  std::string name = "Shahryar";
  std::vector<std::string> traits = {"arrogant", "greedy", "moody", "proud of his ancient court"};
  std::vector<std::string> likes = {"battles", "treasures", "cunning heroes", "palace intrigue"};
  std::vector<std::string> rejects = {"modern technology", "nonsense text",
                                      "stories that ignore what came before"};
  int anger_limit = 3;
  std::string style_note =
      "Speak as an ancient Persian king: grand, vain, vivid. Continue the tale in two to four "
      "sentences of rich prose set in an ancient world.";

  /// Throws ValidationError when a list is empty or anger_limit < 1.
  void validate() const;
  bool operator==(const PersonaConfig&) const = default;
};

enum class VerdictKind { continue_story, rephrase, angry };

struct KingVerdict {
  VerdictKind kind = VerdictKind::continue_story;
  std::string comment;
  std::optional<std::string> continuation;  // iff kind == continue_story
  int mood_delta = 0;                       // [-20, +10]

  static constexpr int kMinDelta = -20;
  static constexpr int kMaxDelta = 10;

  bool rejects_turn() const { return kind != VerdictKind::continue_story; }
  bool operator==(const KingVerdict&) const = default;
};

const char* wire_name(VerdictKind k);

enum class Author { player, king };

struct StoryTurn {
  std::size_t index = 0;
  Author author = Author::player;
  std::string text;
  std::optional<KingVerdict> verdict;          // player turns only
  bool rejected = false;                       // player turns only
  std::optional<std::string> materialized_card;  // king turns only

  bool operator==(const StoryTurn&) const = default;
};

struct WeaponCard {
  std::string id;
  std::string category;
  std::string name;         // <= 60 chars
  std::string description;  // <= 300 chars
  int power = 10;           // [10, 40]
  std::string effect_description;
  std::string player_line;
  std::string king_line;
  std::string source_excerpt;
  std::optional<SceneImageRef> artwork;

  static constexpr int kMinPower = 10;
  static constexpr int kMaxPower = 40;
  static constexpr std::size_t kMaxName = 60;
  static constexpr std::size_t kMaxDescription = 300;

  bool operator==(const WeaponCard&) const = default;
};

enum class BattleResult { victory, defeat };

struct BattlePlay {
  std::string card_id;
  int damage = 0;
  std::string player_line;
  std::string king_line;
  std::string effect_description;
  int king_hp_after = 0;

  bool operator==(const BattlePlay&) const = default;
};

struct BattleState {
  static constexpr int kKingHp = 100;
  static constexpr int kRounds = 4;

  int king_hp = kKingHp;
  int round = 0;
  std::vector<BattlePlay> plays;
  std::optional<BattleResult> outcome;

  bool operator==(const BattleState&) const = default;
};

struct EndingChronicle {
  std::vector<std::string> actions;  // exactly 4, in play order
  std::string downfall;
  std::string title;  // <= 80 chars
  std::string narration;

  static constexpr std::size_t kMaxTitle = 80;
  bool operator==(const EndingChronicle&) const = default;
};

struct GameSession {
  std::string id;
  std::uint64_t seed = 0;
  Phase phase = Phase::storytelling();
  std::vector<StoryTurn> turns;
  int mood = kNeutralMood;
  int anger_count = 0;
  std::vector<WeaponCard> weapons;
  std::optional<SceneImageRef> background;
  std::optional<BattleState> battle;
  std::optional<EndingChronicle> ending;
  PersonaConfig persona;
  std::uint64_t revision = 0;
  /// Images painted so far; feeds deterministic image ids.
  std::uint32_t images_painted = 0;
  Timestamp created_at{};
  Timestamp updated_at{};

  bool operator==(const GameSession&) const = default;

  const WeaponCard* find_card(std::string_view card_id) const;
};

void to_json(json& j, const SceneImageRef& v);
void from_json(const json& j, SceneImageRef& v);
void to_json(json& j, const PersonaConfig& v);
void from_json(const json& j, PersonaConfig& v);
void to_json(json& j, const KingVerdict& v);
void from_json(const json& j, KingVerdict& v);
void to_json(json& j, const StoryTurn& v);
void from_json(const json& j, StoryTurn& v);
void to_json(json& j, const WeaponCard& v);
void from_json(const json& j, WeaponCard& v);
void to_json(json& j, const BattlePlay& v);
void from_json(const json& j, BattlePlay& v);
void to_json(json& j, const BattleState& v);
void from_json(const json& j, BattleState& v);
void to_json(json& j, const EndingChronicle& v);
void from_json(const json& j, EndingChronicle& v);
void to_json(json& j, const GameSession& v);
void from_json(const json& j, GameSession& v);

/// Schema-versioned, key-sorted document; byte-stable for equal sessions.
std::string serialize_session(const GameSession& s);
/// Throws StorageError on schema mismatch or malformed input.
GameSession deserialize_session(std::string_view text);

/// Human-readable list of broken GameSession invariants; empty when sound.
std::vector<std::string> invariant_violations(const GameSession& s);

}  // namespace nights
