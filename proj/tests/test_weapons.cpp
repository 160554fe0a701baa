#include <random>

#include "doctest.h"
#include "nights/errors.hpp"
#include "nights/weapons.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace nights;

namespace {

std::vector<oracle::Category> oracle_lexicon(const WeaponLexicon& lex) {
  std::vector<oracle::Category> out;
  for (const auto& c : lex.categories()) {
    oracle::Category oc{c.id, {c.canonical}};
    oc.terms.insert(oc.terms.end(), c.synonyms.begin(), c.synonyms.end());
    out.push_back(oc);
  }
  return out;
}

GameSession session_with_story() {
  GameSession s = new_session("sess-1", 1, PersonaConfig{}, fixtures::fixed_time());
  StoryTurn p{0, Author::player, "A chef came to court.", KingVerdict{}, false, std::nullopt};
  p.verdict->continuation = "x";
  p.verdict->comment = "ok";
  s.turns.push_back(p);
  s.turns.push_back({1, Author::king, "The king gifted her a gleaming sword from the vault.", std::nullopt, false, std::nullopt});
  return s;
}

KeywordHit sword_hit() {
  return {"sword", "sword", "The king gifted her a gleaming sword from the vault.", 29};
}

}  // namespace

TEST_CASE("default lexicon: seven categories including sword, shield, dagger") {
  const auto lex = default_lexicon();
  CHECK(lex.categories().size() == 7);
  for (const char* id : {"sword", "shield", "dagger"}) CHECK(lex.find(id) != nullptr);
  const auto hit = detect_keyword("a blade", lex);
  REQUIRE(hit);
  CHECK(hit->category_id == "sword");
}

TEST_CASE("lexicon invariants are enforced") {
  auto cats = default_lexicon().categories();
  SUBCASE("count") {
    cats.pop_back();
    CHECK_THROWS_AS(WeaponLexicon{cats}, ValidationError);
  }
  SUBCASE("duplicate term across categories") {
    cats[1].synonyms.push_back("blade");
    CHECK_THROWS_AS(WeaponLexicon{cats}, ValidationError);
  }
  SUBCASE("uppercase term") {
    cats[0].synonyms.push_back("Blade2");
    CHECK_THROWS_AS(WeaponLexicon{cats}, ValidationError);
  }
  SUBCASE("duplicate id") {
    cats[1].id = "sword";
    CHECK_THROWS_AS(WeaponLexicon{cats}, ValidationError);
  }
}

TEST_CASE("lexicon override file") {
  fixtures::TempDir dir;
  json doc = {{"categories", json::array()}};
  for (const char* id : {"sword", "shield", "dagger", "staff", "sling", "whip", "net"}) {
    doc["categories"].push_back({{"id", id}, {"canonical", id}, {"synonyms", json::array()}});
  }
  const auto path = dir.path / "lex.json";
  std::ofstream(path) << doc.dump();
  const auto lex = load_lexicon_file(path.string());
  CHECK(lex.find("sling") != nullptr);
  CHECK(detect_keyword("He spun a sling.", lex)->category_id == "sling");
  CHECK_THROWS_AS(load_lexicon_file((dir.path / "missing.json").string()), NotFound);
}

TEST_CASE("detect_keyword examples") {
  const auto lex = default_lexicon();
  const auto hit = detect_keyword("The king gifted her a gleaming sword from the vault.", lex);
  REQUIRE(hit);
  CHECK(hit->category_id == "sword");
  CHECK(hit->matched_term == "sword");
  CHECK(hit->sentence == "The king gifted her a gleaming sword from the vault.");

  CHECK_FALSE(detect_keyword("", lex));
  CHECK_FALSE(detect_keyword("His swordsmanship was famed.", lex));
}

TEST_CASE("detect_keyword picks the earliest term and its sentence") {
  const auto lex = default_lexicon();
  const auto hit = detect_keyword("Night fell. A SHIELD rose; then a sword! Done.", lex);
  REQUIRE(hit);
  CHECK(hit->category_id == "shield");
  CHECK(hit->matched_term == "shield");
  CHECK(hit->sentence == "A SHIELD rose;");
  CHECK(detect_keyword("(knife)", lex)->category_id == "dagger");
  CHECK(detect_keyword("sword-bearer", lex)->category_id == "sword");
  CHECK_FALSE(detect_keyword("sword_bearer", lex));
}

TEST_CASE("detect_keyword prefers the longer term at the same offset") {
  std::vector<WeaponCategory> cats = {
      {"a", "war", {}},     {"b", "war hammer", {}}, {"c", "c1", {}}, {"d", "d1", {}},
      {"e", "e1", {}},      {"f", "f1", {}},         {"g", "g1", {}},
  };
  const WeaponLexicon lex(cats);
  const auto hit = detect_keyword("The war hammer fell", lex);
  REQUIRE(hit);
  CHECK(hit->category_id == "b");
  const auto oracle_hit = oracle::brute_force_keyword("The war hammer fell", oracle_lexicon(lex));
  CHECK(oracle_hit->category == "b");
}

TEST_CASE("detect_keyword agrees with the brute-force oracle on random texts") {
  const auto lex = default_lexicon();
  const auto olex = oracle_lexicon(lex);
  std::mt19937_64 rng(2024);
  const std::vector<std::string> pieces = {"sword", "Swords", "swordsmanship", "BLADE", "shield", "knife",
                                           "bow", "bowed", "elbow", "axe", "maxed", "lance", "lancer",
                                           "the", "king", "vault", ".", ",", "!", "?", ";", "-", "_",
                                           "(", ")", "\"", "'", "é", "9", "x", " ", " ", " "};
  for (int i = 0; i < 2000; ++i) {
    std::string text;
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) {
      text += pieces[rng() % pieces.size()];
      if (rng() % 2) text += ' ';
    }
    const auto got = detect_keyword(text, lex);
    const auto want = oracle::brute_force_keyword(text, olex);
    REQUIRE_MESSAGE(got.has_value() == want.has_value(), text);
    if (got) {
      CHECK_MESSAGE(got->category_id == want->category, text);
      CHECK_MESSAGE(got->matched_term == want->term, text);
      CHECK_MESSAGE(got->offset == want->offset, text);
    }
  }
}

TEST_CASE("sentence_at splits on terminators") {
  CHECK(sentence_at("One. Two three! Four", 6) == "Two three!");
  CHECK(sentence_at("One. Two three! Four", 17) == "Four");
  CHECK(sentence_at("  Alone  ", 3) == "Alone");
}

TEST_CASE("parse_card clamps power and falls back deterministically") {
  const auto hit = sword_hit();
  CHECK(parse_card(fixtures::card_json("Dawnblade", 25), hit).power == 25);
  CHECK(parse_card(fixtures::card_json("Dawnblade", 999), hit).power == 40);
  CHECK(parse_card(fixtures::card_json("Dawnblade", -5), hit).power == 10);

  const auto mighty = parse_card(fixtures::card_json("Dawnblade", "mighty"), hit);
  const int expected = 10 + static_cast<int>(oracle::fnv1a("Dawnblade") % 31);
  CHECK(mighty.power == expected);
  CHECK(parse_card(fixtures::card_json("Dawnblade", "mighty"), hit).power == mighty.power);
  CHECK(parse_card(fixtures::card_json("Dawnblade", 12.5), hit).power == expected);
  CHECK(parse_card(fixtures::card_json("Dawnblade", nullptr), hit).power == expected);
}

TEST_CASE("parse_card truncates and fills missing lines") {
  const auto hit = sword_hit();
  const std::string long_name(100, 'N');
  const auto card = parse_card(json{{"name", long_name}, {"description", std::string(500, 'd')}}.dump(), hit);
  CHECK(utf8_length(card.name) == 60);
  CHECK(utf8_length(card.description) == 300);
  CHECK_FALSE(card.player_line.empty());
  CHECK_FALSE(card.king_line.empty());
  CHECK_FALSE(card.effect_description.empty());
  CHECK(card_violations(card, default_lexicon()).empty());
  CHECK_THROWS_AS(parse_card(R"({"name":"x"})", hit), ContractError);
  CHECK_THROWS_AS(parse_card("no json", hit), ContractError);
}

TEST_CASE("forge_card appends a valid card") {
  auto s = session_with_story();
  auto backend = scripted_backend({fixtures::card_json("Dawnblade", 25)}, true, 1);
  const auto& card = forge_card(s, sword_hit(), *backend, default_lexicon());
  CHECK(card.power == 25);
  CHECK(card.category == "sword");
  CHECK(s.weapons.size() == 1);
  CHECK(card.id.rfind("card-", 0) == 0);
  CHECK(card_violations(card, default_lexicon()).empty());
}

TEST_CASE("forge_card retries once, then gives up without touching the session") {
  SUBCASE("repair succeeds") {
    auto s = session_with_story();
    auto backend = scripted_backend({"garbage", fixtures::card_json("Second", 30)}, true, 1);
    CHECK(forge_card(s, sword_hit(), *backend, default_lexicon()).name == "Second");
  }
  SUBCASE("repair fails") {
    auto s = session_with_story();
    const auto before = s;
    auto backend = scripted_backend({"garbage", "still garbage"}, true, 1);
    CHECK_THROWS_AS(forge_card(s, sword_hit(), *backend, default_lexicon()), ContractError);
    CHECK(s == before);
  }
  SUBCASE("capacity") {
    auto s = session_with_story();
    s.weapons.resize(4);
    auto backend = scripted_backend({fixtures::card_json("X")}, true, 1);
    CHECK_THROWS_AS(forge_card(s, sword_hit(), *backend, default_lexicon()), CapacityError);
  }
}

TEST_CASE("forge_card never yields an invalid card under fuzzed replies") {
  std::mt19937_64 rng(99);
  const std::vector<json> powers = {25, 999, -3, "mighty", nullptr, 10.0, json::array(), 40, 18446744073709551615ULL};
  const std::vector<json> names = {"Blade", "", "   ", 7, std::string(200, 'z'), "名剣", nullptr};
  const auto lex = default_lexicon();
  for (int i = 0; i < 300; ++i) {
    json doc = {{"name", names[rng() % names.size()]},
                {"description", rng() % 4 ? json("desc") : json(nullptr)},
                {"power", powers[rng() % powers.size()]}};
    if (rng() % 3 == 0) doc["player_line"] = 5;
    std::string raw = doc.dump();
    if (rng() % 4 == 0) raw = "```json\n" + raw + "\n```";
    if (rng() % 5 == 0) raw = raw.substr(0, rng() % (raw.size() + 1));
    auto s = session_with_story();
    auto backend = scripted_backend({raw, raw}, true, 1);
    try {
      const auto& card = forge_card(s, sword_hit(), *backend, lex);
      CHECK(card_violations(card, lex).empty());
    } catch (const ContractError&) {
      CHECK(s.weapons.empty());
    }
  }
}
