#include <random>

#include "doctest.h"
#include "nights/errors.hpp"
#include "nights/king.hpp"
#include "support/oracles.hpp"

using namespace nights;

namespace {

std::vector<StoryTurn> long_history(std::size_t n, std::size_t chars_each) {
  std::vector<StoryTurn> turns;
  for (std::size_t i = 0; i < n; ++i) {
    StoryTurn t;
    t.index = i;
    t.author = i % 2 == 0 ? Author::player : Author::king;
    t.text = "Turn " + std::to_string(i) + ". " + std::string(chars_each, 'a');
    turns.push_back(t);
  }
  return turns;
}

}  // namespace

TEST_CASE("evaluation prompt carries persona and the verdict contract") {
  const auto bundle = build_evaluation_prompt(PersonaConfig{}, {}, "Once, a humble chef served the caliph.");
  CHECK(bundle.system.find("arrogant") != std::string::npos);
  CHECK(bundle.system.find("Shahryar") != std::string::npos);
  for (const char* field : {"kind", "comment", "continuation", "mood_delta"}) {
    CHECK(bundle.system.find(std::string("\"") + field + "\"") != std::string::npos);
  }
  REQUIRE_FALSE(bundle.messages.empty());
  CHECK(bundle.messages.back().content == "Once, a humble chef served the caliph.");
  CHECK(bundle.transcript.empty());
}

TEST_CASE("persona likes flow into the system text") {
  PersonaConfig p;
  p.likes = {"astronomy"};
  const auto bundle = build_evaluation_prompt(p, {}, "The stars wheeled.");
  CHECK(bundle.system.find("astronomy") != std::string::npos);
}

TEST_CASE("long histories are windowed under the budget with a synopsis") {
  const auto turns = long_history(50, 400);
  const auto bundle = build_evaluation_prompt(PersonaConfig{}, turns, "And then?");
  CHECK(utf8_length(bundle.transcript) <= 6000);
  CHECK(bundle.transcript.rfind("[Synopsis of ", 0) == 0);
  // The newest turn is always kept verbatim.
  CHECK(bundle.transcript.find("Turn 49.") != std::string::npos);
  CHECK(bundle.transcript.find("Turn 0.") != std::string::npos);  // summarized, first sentence
  CHECK(bundle.transcript.find("Turn 0. aaaa") == std::string::npos);
}

TEST_CASE("short histories are passed whole") {
  const auto turns = long_history(4, 20);
  const auto window = transcript_window(turns);
  CHECK(window.find("[Synopsis") == std::string::npos);
  CHECK(window.find("Turn 0. ") != std::string::npos);
}

TEST_CASE("windowing respects tiny budgets") {
  const auto turns = long_history(10, 100);
  for (std::size_t budget : {50u, 300u, 421u, 1000u}) {
    CHECK(utf8_length(transcript_window(turns, budget)) <= budget);
  }
}

TEST_CASE("prompt building is deterministic") {
  const auto turns = long_history(30, 300);
  CHECK(build_evaluation_prompt(PersonaConfig{}, turns, "x") ==
        build_evaluation_prompt(PersonaConfig{}, turns, "x"));
}

TEST_CASE("parse_verdict reads a well-formed continue") {
  const auto v = parse_verdict(
      R"({"kind":"continue","comment":"Ha!","continuation":"The chef bowed…","mood_delta":5})");
  CHECK(v.kind == VerdictKind::continue_story);
  CHECK(v.comment == "Ha!");
  REQUIRE(v.continuation);
  CHECK(*v.continuation == "The chef bowed…");
  CHECK(v.mood_delta == 5);
}

TEST_CASE("parse_verdict strips fences and normalizes case, agreeing with the oracle") {
  const std::string raw = "```json\n{\"kind\":\"ANGRY\",\"comment\":\"Nonsense!\",\"mood_delta\":-15}\n```";
  const auto expected = oracle::fenced_verdict(raw);
  REQUIRE(expected);
  CHECK(expected->kind == "angry");
  CHECK(expected->mood_delta == -15);

  const auto v = parse_verdict(raw);
  CHECK(v.kind == VerdictKind::angry);
  CHECK(wire_name(v.kind) == expected->kind);
  CHECK(v.comment == expected->comment);
  CHECK(v.mood_delta == expected->mood_delta);
  CHECK_FALSE(v.continuation);
}

TEST_CASE("parse_verdict tolerates leading prose and trailing chatter") {
  const auto v = parse_verdict(
      "Certainly! Here is my reply: {\"kind\": \"Rephrase\", \"comment\": \"Again.\", \"mood_delta\": -3} Hope it helps.");
  CHECK(v.kind == VerdictKind::rephrase);
  CHECK(v.mood_delta == -3);
}

TEST_CASE("parse_verdict without JSON is a contract error") {
  CHECK_THROWS_AS(parse_verdict("I refuse."), ContractError);
  CHECK_THROWS_AS(parse_verdict(""), ContractError);
  CHECK_THROWS_AS(parse_verdict(R"({"kind":"dance","comment":"x"})"), ContractError);
}

TEST_CASE("continue without continuation is a contract error") {
  CHECK_THROWS_WITH_AS(parse_verdict(R"({"kind":"continue","comment":"ok","mood_delta":2})"),
                       doctest::Contains("continuation"), ContractError);
  CHECK_THROWS_AS(parse_verdict(R"({"kind":"continue","continuation":"   "})"), ContractError);
}

TEST_CASE("parse_verdict clamps and repairs fields") {
  SUBCASE("delta clamped into [-20, 10]") {
    CHECK(parse_verdict(R"({"kind":"continue","continuation":"a","mood_delta":99})").mood_delta == 10);
    CHECK(parse_verdict(R"({"kind":"rephrase","mood_delta":-99})").mood_delta == -20);
    CHECK(parse_verdict(R"({"kind":"rephrase","mood_delta":18446744073709551615})").mood_delta == 10);
    CHECK(parse_verdict(R"({"kind":"continue","continuation":"a","mood_delta":2.6})").mood_delta == 3);
  }
  SUBCASE("angry always lowers mood") {
    CHECK(parse_verdict(R"({"kind":"angry","mood_delta":5})").mood_delta < 0);
    CHECK(parse_verdict(R"({"kind":"angry"})").mood_delta == -10);
  }
  SUBCASE("continuation dropped on rejections, comment defaulted") {
    const auto v = parse_verdict(R"({"kind":"angry_correct","continuation":"zzz"})");
    CHECK(v.kind == VerdictKind::angry);
    CHECK_FALSE(v.continuation);
    CHECK_FALSE(v.comment.empty());
  }
  SUBCASE("first usable object wins") {
    const auto v = parse_verdict(R"({"note":1} {"kind":"rephrase","comment":"B"})");
    CHECK(v.comment == "B");
  }
}

TEST_CASE("apply_mood clamps") {
  KingVerdict v;
  v.mood_delta = 5;
  CHECK(apply_mood(50, v) == 55);
  v.mood_delta = -20;
  CHECK(apply_mood(3, v) == 0);
  v.mood_delta = 10;
  CHECK(apply_mood(98, v) == 100);
}

TEST_CASE("apply_mood is bounded and monotone in delta") {
  for (int mood = 0; mood <= 100; ++mood) {
    int previous = -1;
    for (int d = KingVerdict::kMinDelta; d <= KingVerdict::kMaxDelta; ++d) {
      KingVerdict v;
      v.mood_delta = d;
      const int m = apply_mood(mood, v);
      CHECK(m >= 0);
      CHECK(m <= 100);
      CHECK(m >= previous);
      previous = m;
    }
  }
}

TEST_CASE("verdict round trip on generated verdicts") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> words = {"gold", "é", "\"quoted\"", "{brace}", "```", "\\", "\n", "王"};
  auto text = [&](std::size_t min_words) {
    std::string s;
    const std::size_t n = min_words + rng() % 5;
    for (std::size_t i = 0; i < n; ++i) s += words[rng() % words.size()] + " ";
    return s + "x";
  };
  for (int i = 0; i < 500; ++i) {
    KingVerdict v;
    v.kind = static_cast<VerdictKind>(rng() % 3);
    v.comment = text(0);
    v.mood_delta = KingVerdict::kMinDelta + static_cast<int>(rng() % 31);
    if (v.kind == VerdictKind::angry && v.mood_delta >= 0) v.mood_delta = -1 - static_cast<int>(rng() % 20);
    if (v.kind == VerdictKind::continue_story) v.continuation = text(1);
    REQUIRE(is_valid(v));
    CHECK(parse_verdict(serialize_verdict(v)) == v);
  }
}

TEST_CASE("repair messages append the bad reply and the error") {
  const auto msgs = repair_messages({{"user", "tell"}}, "oops", "actions must have length 4");
  REQUIRE(msgs.size() == 3);
  CHECK(msgs[1].role == "assistant");
  CHECK(msgs[1].content == "oops");
  CHECK(msgs[2].content.find("actions must have length 4") != std::string::npos);
}
