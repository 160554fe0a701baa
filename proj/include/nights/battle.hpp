#pragma once

#include <string_view>

#include "nights/model.hpp"

namespace nights {

/// Pure damage step: appends the play, lowers king_hp (floored at 0) and
/// settles the outcome after the fourth play.
BattlePlay resolve_play(BattleState& battle, const WeaponCard& card);

/// Requires phase Battle, four cards and no battle yet; throws WrongPhase.
const BattleState& start_battle(GameSession& session);

/// Plays a held, unplayed card. Throws WrongPhase, UnknownCard or
/// AlreadyPlayed. Does not move the phase; see session.hpp.
BattlePlay play_card(GameSession& session, std::string_view card_id);

}  // namespace nights
