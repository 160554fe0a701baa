#include "nights/battle.hpp"

#include <algorithm>

#include "nights/errors.hpp"

namespace nights {

BattlePlay resolve_play(BattleState& battle, const WeaponCard& card) {
  battle.king_hp = std::max(0, battle.king_hp - card.power);
  BattlePlay play{card.id,        card.power,         card.player_line,
                  card.king_line, card.effect_description, battle.king_hp};
  battle.plays.push_back(play);
  battle.round = static_cast<int>(battle.plays.size());
  if (battle.round == BattleState::kRounds) {
    battle.outcome = battle.king_hp == 0 ? BattleResult::victory : BattleResult::defeat;
  }
  return play;
}

const BattleState& start_battle(GameSession& session) {
  if (session.phase != Phase::battle()) {
    throw WrongPhase("battle can only start in the battle phase (phase is " +
                     to_string(session.phase) + ")");
  }
  if (session.weapons.size() != kWeaponSlots) throw WrongPhase("battle needs four weapon cards");
  if (session.battle) throw WrongPhase("battle already started");
  session.battle = BattleState{};
  return *session.battle;
}

BattlePlay play_card(GameSession& session, std::string_view card_id) {
  if (session.phase != Phase::battle() || !session.battle) {
    throw WrongPhase("no battle in progress (phase is " + to_string(session.phase) + ")");
  }
  BattleState& battle = *session.battle;
  if (battle.round >= BattleState::kRounds) throw WrongPhase("all four cards already played");
  const WeaponCard* card = session.find_card(card_id);
  if (card == nullptr) throw UnknownCard(std::string(card_id));
  const bool played = std::any_of(battle.plays.begin(), battle.plays.end(),
                                  [&](const BattlePlay& p) { return p.card_id == card_id; });
  if (played) throw AlreadyPlayed(std::string(card_id));
  return resolve_play(battle, *card);
}

}  // namespace nights
