#include "nights/model.hpp"

#include <set>

#include "nights/errors.hpp"

namespace nights {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::victory: return "victory";
    case Outcome::dawn: return "dawn";
    case Outcome::abandoned: return "abandoned";
  }
  return "unknown";
}

std::string to_string(Phase p) {
  switch (p.stage()) {
    case Phase::Stage::storytelling: return "storytelling";
    case Phase::Stage::battle: return "battle";
    case Phase::Stage::ending: return "ending";
    case Phase::Stage::closed: return "closed:" + to_string(*p.outcome());
  }
  return "unknown";
}

Phase phase_from_string(const std::string& s) {
  if (s == "storytelling") return Phase::storytelling();
  if (s == "battle") return Phase::battle();
  if (s == "ending") return Phase::ending();
  if (s == "closed:victory") return Phase::closed(Outcome::victory);
  if (s == "closed:dawn") return Phase::closed(Outcome::dawn);
  if (s == "closed:abandoned") return Phase::closed(Outcome::abandoned);
  throw ValidationError("unknown phase: " + s);
}

void PersonaConfig::validate() const {
  if (name.empty()) throw ValidationError("persona name is empty");
  if (traits.empty() || likes.empty() || rejects.empty()) {
    throw ValidationError("persona traits, likes and rejects must be non-empty");
  }
  if (anger_limit < 1) throw ValidationError("anger_limit must be >= 1");
}

const char* wire_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::continue_story: return "continue";
    case VerdictKind::rephrase: return "rephrase";
    case VerdictKind::angry: return "angry";
  }
  return "continue";
}

const WeaponCard* GameSession::find_card(std::string_view card_id) const {
  for (const auto& c : weapons) {
    if (c.id == card_id) return &c;
  }
  return nullptr;
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const SceneImageRef& v) {
  j = {{"id", v.id},
       {"path_or_url", v.path_or_url},
       {"prompt_used", v.prompt_used},
       {"created_at", format_iso8601(v.created_at)}};
}

void from_json(const json& j, SceneImageRef& v) {
  j.at("id").get_to(v.id);
  j.at("path_or_url").get_to(v.path_or_url);
  j.at("prompt_used").get_to(v.prompt_used);
  v.created_at = parse_iso8601(j.at("created_at").get<std::string>());
}

void to_json(json& j, const PersonaConfig& v) {
  j = {{"name", v.name},         {"traits", v.traits},           {"likes", v.likes},
       {"rejects", v.rejects},   {"anger_limit", v.anger_limit}, {"style_note", v.style_note}};
}

// Partial documents are allowed so callers can override a single field.
void from_json(const json& j, PersonaConfig& v) {
  if (!j.is_object()) throw ValidationError("persona must be an object");
  if (j.contains("name")) j.at("name").get_to(v.name);
  if (j.contains("traits")) j.at("traits").get_to(v.traits);
  if (j.contains("likes")) j.at("likes").get_to(v.likes);
  if (j.contains("rejects")) j.at("rejects").get_to(v.rejects);
  if (j.contains("anger_limit")) j.at("anger_limit").get_to(v.anger_limit);
  if (j.contains("style_note")) j.at("style_note").get_to(v.style_note);
}

void to_json(json& j, const KingVerdict& v) {
  j = {{"kind", wire_name(v.kind)}, {"comment", v.comment}, {"mood_delta", v.mood_delta}};
  if (v.continuation) j["continuation"] = *v.continuation;
}

void from_json(const json& j, KingVerdict& v) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "continue") {
    v.kind = VerdictKind::continue_story;
  } else if (kind == "rephrase") {
    v.kind = VerdictKind::rephrase;
  } else if (kind == "angry") {
    v.kind = VerdictKind::angry;
  } else {
    throw ValidationError("unknown verdict kind: " + kind);
  }
  j.at("comment").get_to(v.comment);
  j.at("mood_delta").get_to(v.mood_delta);
  v.continuation = get_opt<std::string>(j, "continuation");
}

void to_json(json& j, const StoryTurn& v) {
  j = {{"index", v.index},
       {"author", v.author == Author::player ? "player" : "king"},
       {"text", v.text},
       {"verdict", opt(v.verdict)},
       {"rejected", v.rejected},
       {"materialized_card", opt(v.materialized_card)}};
}

void from_json(const json& j, StoryTurn& v) {
  j.at("index").get_to(v.index);
  v.author = j.at("author").get<std::string>() == "king" ? Author::king : Author::player;
  j.at("text").get_to(v.text);
  v.verdict = get_opt<KingVerdict>(j, "verdict");
  j.at("rejected").get_to(v.rejected);
  v.materialized_card = get_opt<std::string>(j, "materialized_card");
}

void to_json(json& j, const WeaponCard& v) {
  j = {{"id", v.id},
       {"category", v.category},
       {"name", v.name},
       {"description", v.description},
       {"power", v.power},
       {"effect_description", v.effect_description},
       {"player_line", v.player_line},
       {"king_line", v.king_line},
       {"source_excerpt", v.source_excerpt},
       {"artwork", opt(v.artwork)}};
}

void from_json(const json& j, WeaponCard& v) {
  j.at("id").get_to(v.id);
  j.at("category").get_to(v.category);
  j.at("name").get_to(v.name);
  j.at("description").get_to(v.description);
  j.at("power").get_to(v.power);
  j.at("effect_description").get_to(v.effect_description);
  j.at("player_line").get_to(v.player_line);
  j.at("king_line").get_to(v.king_line);
  j.at("source_excerpt").get_to(v.source_excerpt);
  v.artwork = get_opt<SceneImageRef>(j, "artwork");
}

void to_json(json& j, const BattlePlay& v) {
  j = {{"card_id", v.card_id},
       {"damage", v.damage},
       {"player_line", v.player_line},
       {"king_line", v.king_line},
       {"effect_description", v.effect_description},
       {"king_hp_after", v.king_hp_after}};
}

void from_json(const json& j, BattlePlay& v) {
  j.at("card_id").get_to(v.card_id);
  j.at("damage").get_to(v.damage);
  j.at("player_line").get_to(v.player_line);
  j.at("king_line").get_to(v.king_line);
  j.at("effect_description").get_to(v.effect_description);
  j.at("king_hp_after").get_to(v.king_hp_after);
}

void to_json(json& j, const BattleState& v) {
  json outcome = nullptr;
  if (v.outcome) outcome = *v.outcome == BattleResult::victory ? "victory" : "defeat";
  j = {{"king_hp", v.king_hp}, {"round", v.round}, {"plays", v.plays}, {"outcome", outcome}};
}

void from_json(const json& j, BattleState& v) {
  j.at("king_hp").get_to(v.king_hp);
  j.at("round").get_to(v.round);
  j.at("plays").get_to(v.plays);
  v.outcome.reset();
  if (const auto o = get_opt<std::string>(j, "outcome")) {
    v.outcome = *o == "victory" ? BattleResult::victory : BattleResult::defeat;
  }
}

void to_json(json& j, const EndingChronicle& v) {
  j = {{"actions", v.actions},
       {"downfall", v.downfall},
       {"title", v.title},
       {"narration", v.narration}};
}

void from_json(const json& j, EndingChronicle& v) {
  j.at("actions").get_to(v.actions);
  j.at("downfall").get_to(v.downfall);
  j.at("title").get_to(v.title);
  j.at("narration").get_to(v.narration);
}

void to_json(json& j, const GameSession& v) {
  j = {{"schema", kSchemaVersion},
       {"id", v.id},
       {"seed", v.seed},
       {"phase", to_string(v.phase)},
       {"turns", v.turns},
       {"mood", v.mood},
       {"anger_count", v.anger_count},
       {"weapons", v.weapons},
       {"background", opt(v.background)},
       {"battle", opt(v.battle)},
       {"ending", opt(v.ending)},
       {"persona", v.persona},
       {"revision", v.revision},
       {"images_painted", v.images_painted},
       {"created_at", format_iso8601(v.created_at)},
       {"updated_at", format_iso8601(v.updated_at)}};
}

void from_json(const json& j, GameSession& v) {
  if (j.at("schema").get<int>() != kSchemaVersion) {
    throw StorageError("unsupported session schema " + j.at("schema").dump());
  }
  j.at("id").get_to(v.id);
  j.at("seed").get_to(v.seed);
  v.phase = phase_from_string(j.at("phase").get<std::string>());
  j.at("turns").get_to(v.turns);
  j.at("mood").get_to(v.mood);
  j.at("anger_count").get_to(v.anger_count);
  j.at("weapons").get_to(v.weapons);
  v.background = get_opt<SceneImageRef>(j, "background");
  v.battle = get_opt<BattleState>(j, "battle");
  v.ending = get_opt<EndingChronicle>(j, "ending");
  v.persona = PersonaConfig{};
  from_json(j.at("persona"), v.persona);
  j.at("revision").get_to(v.revision);
  j.at("images_painted").get_to(v.images_painted);
  v.created_at = parse_iso8601(j.at("created_at").get<std::string>());
  v.updated_at = parse_iso8601(j.at("updated_at").get<std::string>());
}

std::string serialize_session(const GameSession& s) { return json(s).dump(2) + "\n"; }

GameSession deserialize_session(std::string_view text) {
  try {
    return json::parse(text).get<GameSession>();
  } catch (const StorageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StorageError(std::string("malformed session document: ") + e.what());
  }
}

std::vector<std::string> invariant_violations(const GameSession& s) {
  std::vector<std::string> out;
  const auto stage = s.phase.stage();
  const bool closed = s.phase.is_closed();

  if (s.weapons.size() > kWeaponSlots) out.push_back("more than four weapons");
  if (stage == Phase::Stage::battle && s.weapons.size() != kWeaponSlots) {
    out.push_back("battle phase without exactly four weapons");
  }
  if (s.mood < 0 || s.mood > 100) out.push_back("mood outside [0,100]");
  if (s.anger_count < 0) out.push_back("negative anger_count");

  if (s.battle && !(stage == Phase::Stage::battle || stage == Phase::Stage::ending || closed)) {
    out.push_back("battle present outside battle/ending/closed");
  }
  if (s.ending && !(stage == Phase::Stage::ending || closed)) {
    out.push_back("ending present outside ending/closed");
  }
  if (stage == Phase::Stage::ending && !s.ending) out.push_back("ending phase without ending");
  if (stage == Phase::Stage::ending && !(s.battle && s.battle->outcome)) {
    out.push_back("ending phase without resolved battle");
  }
  if (s.ending && !(s.battle && s.battle->outcome)) out.push_back("ending without resolved battle");
  if (s.phase == Phase::closed(Outcome::victory) &&
      !(s.battle && s.battle->outcome == BattleResult::victory && s.ending)) {
    out.push_back("victory without won battle and ending");
  }

  for (std::size_t i = 0; i < s.turns.size(); ++i) {
    const auto& t = s.turns[i];
    if (t.index != i) out.push_back("turn index mismatch at " + std::to_string(i));
    const Author expected = i % 2 == 0 ? Author::player : Author::king;
    if (t.author != expected) out.push_back("turns do not alternate at " + std::to_string(i));
    const auto len = utf8_length(t.text);
    if (len < 1 || len > 2000) out.push_back("turn text length out of range at " + std::to_string(i));
    if (t.rejected && t.author != Author::player) out.push_back("rejected king turn");
    if (t.materialized_card && t.author != Author::king) out.push_back("card on player turn");
    if (t.verdict && t.author != Author::player) out.push_back("verdict on king turn");
    if (t.author == Author::player && t.verdict && t.rejected != t.verdict->rejects_turn()) {
      out.push_back("rejected flag disagrees with verdict at " + std::to_string(i));
    }
    if (t.materialized_card && s.find_card(*t.materialized_card) == nullptr) {
      out.push_back("turn references unknown card " + *t.materialized_card);
    }
  }
  if (s.turns.size() % 2 != 0) out.push_back("player turn without King reply");

  std::set<std::string> ids;
  for (const auto& c : s.weapons) {
    if (!ids.insert(c.id).second) out.push_back("duplicate card id " + c.id);
    if (c.power < WeaponCard::kMinPower || c.power > WeaponCard::kMaxPower) {
      out.push_back("card power out of range");
    }
    if (c.name.empty() || c.description.empty()) out.push_back("card without name/description");
  }

  if (s.battle) {
    const auto& b = *s.battle;
    if (b.round != static_cast<int>(b.plays.size())) out.push_back("battle round != plays");
    if (b.outcome.has_value() != (b.round == BattleState::kRounds)) {
      out.push_back("battle outcome presence disagrees with round");
    }
    int hp = BattleState::kKingHp;
    std::set<std::string> played;
    for (const auto& p : b.plays) {
      const WeaponCard* card = s.find_card(p.card_id);
      if (card == nullptr) {
        out.push_back("play of unknown card");
        continue;
      }
      if (!played.insert(p.card_id).second) out.push_back("card played twice");
      if (p.damage != card->power) out.push_back("play damage != card power");
      hp = std::max(0, hp - p.damage);
      if (p.king_hp_after != hp) out.push_back("king_hp_after mismatch");
    }
    if (b.king_hp != hp) out.push_back("king_hp != 100 - damage");
    if (b.outcome && (*b.outcome == BattleResult::victory) != (b.king_hp == 0)) {
      out.push_back("battle outcome disagrees with king_hp");
    }
  }
  if (s.ending && s.ending->actions.size() != 4) out.push_back("ending without four actions");
  return out;
}

}  // namespace nights
