#include <algorithm>
#include <random>

#include "doctest.h"
#include "nights/battle.hpp"
#include "nights/errors.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace nights;

namespace {

GameSession battle_session(const std::vector<int>& powers) {
  GameSession s = new_session("b", 1, PersonaConfig{}, fixtures::fixed_time());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    WeaponCard c;
    c.id = "card-" + std::to_string(i);
    c.category = "sword";
    c.name = "Card " + std::to_string(i);
    c.description = "d";
    c.power = powers[i];
    c.player_line = "p" + std::to_string(i);
    c.king_line = "k" + std::to_string(i);
    c.effect_description = "e" + std::to_string(i);
    s.weapons.push_back(c);
  }
  if (powers.size() == 4) s.phase = Phase::battle();
  return s;
}

}  // namespace

TEST_CASE("start_battle") {
  auto s = battle_session({10, 20, 30, 40});
  const auto& b = start_battle(s);
  CHECK(b.king_hp == 100);
  CHECK(b.round == 0);
  CHECK_FALSE(b.outcome);
  CHECK_THROWS_AS(start_battle(s), WrongPhase);

  auto three = battle_session({10, 20, 30});
  CHECK_THROWS_AS(start_battle(three), WrongPhase);
}

TEST_CASE("overkill in every order is a victory at zero hp") {
  std::vector<int> order = {0, 1, 2, 3};
  const std::vector<int> powers = {30, 30, 25, 20};
  int permutations = 0;
  do {
    auto s = battle_session(powers);
    start_battle(s);
    for (int i : order) play_card(s, "card-" + std::to_string(i));
    CHECK(s.battle->king_hp == 0);
    CHECK(s.battle->outcome == BattleResult::victory);
    ++permutations;
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(permutations == 24);
}

TEST_CASE("weak cards leave the King standing") {
  auto s = battle_session({10, 10, 10, 10});
  start_battle(s);
  for (int i = 0; i < 4; ++i) play_card(s, "card-" + std::to_string(i));
  CHECK(s.battle->king_hp == oracle::final_hp({10, 10, 10, 10}));
  CHECK(s.battle->king_hp == 60);
  CHECK(s.battle->outcome == BattleResult::defeat);
}

TEST_CASE("plays surface the card's own lines and reject misuse") {
  auto s = battle_session({25, 25, 25, 25});
  CHECK_THROWS_AS(play_card(s, "card-0"), WrongPhase);
  start_battle(s);
  const auto p = play_card(s, "card-2");
  CHECK(p.damage == 25);
  CHECK(p.player_line == "p2");
  CHECK(p.king_line == "k2");
  CHECK(p.effect_description == "e2");
  CHECK(p.king_hp_after == 75);
  CHECK_THROWS_AS(play_card(s, "card-2"), AlreadyPlayed);
  CHECK_THROWS_AS(play_card(s, "nope"), UnknownCard);
  CHECK(s.battle->round == 1);
}

TEST_CASE("king_hp never rises and never goes negative") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> powers(4);
    for (auto& p : powers) p = 10 + static_cast<int>(rng() % 31);
    auto s = battle_session(powers);
    start_battle(s);
    int last = 100;
    for (int i = 0; i < 4; ++i) {
      play_card(s, "card-" + std::to_string(i));
      CHECK(s.battle->king_hp <= last);
      CHECK(s.battle->king_hp >= 0);
      last = s.battle->king_hp;
    }
  }
}
