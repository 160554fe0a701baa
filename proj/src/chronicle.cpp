#include "nights/chronicle.hpp"

#include <spdlog/spdlog.h>

#include "nights/errors.hpp"
#include "nights/king.hpp"
#include "nights/structured.hpp"

namespace nights {

void to_json(json& j, const Storybook& v) {
  j = {{"schema", kSchemaVersion},
       {"session_id", v.session_id},
       {"seed", v.seed},
       {"created_at", format_iso8601(v.created_at)},
       {"persona_name", v.persona_name},
       {"turns", v.turns},
       {"weapons", v.weapons},
       {"battle", v.battle ? json(*v.battle) : json(nullptr)},
       {"ending", v.ending ? json(*v.ending) : json(nullptr)},
       {"outcome", v.outcome}};
}

void from_json(const json& j, Storybook& v) {
  if (j.at("schema").get<int>() != kSchemaVersion) throw ValidationError("unsupported storybook schema");
  j.at("session_id").get_to(v.session_id);
  j.at("seed").get_to(v.seed);
  v.created_at = parse_iso8601(j.at("created_at").get<std::string>());
  j.at("persona_name").get_to(v.persona_name);
  j.at("turns").get_to(v.turns);
  j.at("weapons").get_to(v.weapons);
  v.battle.reset();
  v.ending.reset();
  if (!j.at("battle").is_null()) v.battle = j.at("battle").get<BattleState>();
  if (!j.at("ending").is_null()) v.ending = j.at("ending").get<EndingChronicle>();
  j.at("outcome").get_to(v.outcome);
}

std::string outcome_label(const GameSession& s) {
  const auto o = s.phase.outcome();
  if (!o) return to_string(s.phase);
  if (*o == Outcome::dawn && s.battle && s.battle->outcome == BattleResult::defeat) return "defeat";
  return to_string(*o);
}

namespace {

std::string required_text(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || trim(it->get_ref<const std::string&>()).empty()) {
    throw ContractError(std::string(key) + " must be a non-empty string");
  }
  return it->get<std::string>();
}

const WeaponCard* card_for(const GameSession& s, const BattlePlay& p) {
  return s.find_card(p.card_id);
}

}  // namespace

EndingChronicle parse_ending(std::string_view raw) {
  const auto obj = extract_json_object(raw, [](const json& o) { return o.contains("actions"); });
  if (!obj) throw ContractError("reply must contain a JSON object with an actions array");
  const json& actions = obj->at("actions");
  if (!actions.is_array() || actions.size() != 4) throw ContractError("actions must have length 4");

  EndingChronicle e;
  for (const auto& a : actions) {
    if (!a.is_string() || trim(a.get_ref<const std::string&>()).empty()) {
      throw ContractError("every action must be a non-empty string");
    }
    e.actions.push_back(a.get<std::string>());
  }
  e.downfall = required_text(*obj, "downfall");
  e.title = utf8_truncate(required_text(*obj, "title"), EndingChronicle::kMaxTitle);
  e.narration = required_text(*obj, "narration");
  return e;
}

GenerationRequest ending_request(const GameSession& session) {
  const bool won = session.battle && session.battle->outcome == BattleResult::victory;
  std::string system =
      "You are a bard of the ancient court. Sing the ending of the storyteller " +
      std::string(kStorytellerName) + "'s tale in rich, rhythmic language.\n" +
      (won ? "The storyteller has overthrown King " + session.persona.name + "; portray his downfall.\n"
           : "King " + session.persona.name +
                 " survived the battle; portray how he endured, humbled, until dawn.\n") +
      "Reply with one JSON object and nothing else:\n"
      "{\"actions\": [four strings, one per weapon used, in the order played],\n"
      " \"downfall\": \"the King's fate\",\n"
      " \"title\": \"an honorific bestowed on the storyteller, at most 80 characters\",\n"
      " \"narration\": \"the full bardic ending\"}\n";

  std::string user = "The tale as it was told:\n" + transcript_window(session.turns) + "\n\nThe battle:\n";
  if (session.battle) {
    int n = 1;
    for (const auto& p : session.battle->plays) {
      const WeaponCard* card = card_for(session, p);
      user += std::to_string(n++) + ". " + (card ? card->name : p.card_id) + " (power " +
              std::to_string(p.damage) + "): " + p.effect_description + " King's strength left: " +
              std::to_string(p.king_hp_after) + "\n";
    }
  }
  auto request = GenerationRequest::chat(std::move(system), {{"user", std::move(user)}}, 0.2,
                                         Purpose::ending);
  request.seed = session.seed;
  return request;
}

EndingChronicle template_ending(const GameSession& session) {
  EndingChronicle e;
  const std::string king = "King " + session.persona.name;
  if (session.battle) {
    for (const auto& p : session.battle->plays) {
      const WeaponCard* card = card_for(session, p);
      const std::string name = card ? card->name : p.card_id;
      e.actions.push_back(std::string(kStorytellerName) + " struck with " + name + ": " +
                          p.effect_description);
    }
  }
  while (e.actions.size() < 4) {
    e.actions.push_back(std::string(kStorytellerName) + " held her ground.");
  }
  const bool won = session.battle && session.battle->outcome == BattleResult::victory;
  if (won) {
    e.downfall = king + " fell from his throne, undone by the weapons of his own tale.";
    e.title = std::string(kStorytellerName) + " the Unbowed";
  } else {
    const int hp = session.battle ? session.battle->king_hp : BattleState::kKingHp;
    e.downfall = king + " staggered but lived, " + std::to_string(hp) +
                 " of his strength remaining, and the dawn found him humbled.";
    e.title = std::string(kStorytellerName) + " Who Saw the Dawn";
  }
  e.narration = "Hear now how " + std::string(kStorytellerName) + " met " + king + ". ";
  for (const auto& a : e.actions) e.narration += a + " ";
  e.narration += e.downfall;
  return e;
}

EndingChronicle generate_ending(const GameSession& session, Backend& backend) {
  if (session.phase != Phase::ending() || !session.battle || !session.battle->outcome) {
    throw WrongPhase("ending requires a resolved battle (phase is " + to_string(session.phase) + ")");
  }
  GenerationRequest request = ending_request(session);
  std::string reply;
  try {
    reply = backend.generate(request).text;
    return parse_ending(reply);
  } catch (const ContractError& first) {
    try {
      request.messages = repair_messages(request.messages, reply, first.what());
      return parse_ending(backend.generate(request).text);
    } catch (const Error& second) {
      spdlog::warn("ending generation failed twice ({}); using template ending", second.what());
    }
  } catch (const BackendError& e) {
    spdlog::warn("ending generation failed ({}); using template ending", e.what());
  }
  return template_ending(session);
}

Storybook make_storybook(const GameSession& s, Timestamp created_at) {
  if (!s.phase.is_closed()) throw WrongPhase("storybook requires a closed session");
  return Storybook{s.id,      s.seed,   created_at, s.persona.name,      s.turns,
                   s.weapons, s.battle, s.ending,   outcome_label(s)};
}

std::string storybook_json(const Storybook& book) {
  return json(book).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

Storybook parse_storybook(std::string_view text) {
  try {
    return json::parse(text).get<Storybook>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed storybook: ") + e.what());
  }
}

namespace {

// Backticks and table pipes would break the layout; raw fences must never
// leak into the render.
std::string md(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '`') continue;
    if (c == '\n' || c == '\r') {
      out += ' ';
      continue;
    }
    out += c;
  }
  return out;
}

std::string cell(std::string_view s) {
  std::string out;
  for (char c : md(s)) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

std::string outcome_heading(const std::string& label) {
  if (label == "victory") return "Victory";
  if (label == "defeat") return "Defeat: the King survives";
  if (label == "dawn") return "Dawn: the King's patience ran out";
  if (label == "abandoned") return "Abandoned";
  return label;
}

}  // namespace

std::string render_markdown(const Storybook& b) {
  std::string out;
  const std::string title =
      b.ending ? md(b.ending->title) : "The Tale Told to King " + md(b.persona_name);
  out += "# " + title + "\n\n";
  out += "Session " + b.session_id + " (seed " + std::to_string(b.seed) + "), written " +
         format_iso8601(b.created_at) + ".\n\n";
  out += "Outcome: **" + outcome_heading(b.outcome) + "**\n\n";

  out += "## The Tale\n\n";
  for (const auto& t : b.turns) {
    if (t.author == Author::player) {
      if (t.rejected) {
        out += "**" + std::string(kStorytellerName) + ":** ~~" + md(t.text) + "~~\n\n";
      } else {
        out += "**" + std::string(kStorytellerName) + ":** " + md(t.text) + "\n\n";
      }
      if (t.verdict) {
        out += "> *The King (" + std::string(wire_name(t.verdict->kind)) + ", mood " +
               (t.verdict->mood_delta >= 0 ? "+" : "") + std::to_string(t.verdict->mood_delta) +
               "):* " + md(t.verdict->comment) + "\n\n";
      }
    } else {
      out += "**King " + md(b.persona_name) + ":** " + md(t.text) + "\n\n";
      if (t.materialized_card) out += "*A weapon materializes: " + *t.materialized_card + "*\n\n";
    }
  }

  out += "## Weapons\n\n";
  if (b.weapons.empty()) {
    out += "No weapons were forged.\n\n";
  } else {
    out += "| # | Id | Name | Category | Power | Description |\n";
    out += "|---|----|------|----------|-------|-------------|\n";
    for (std::size_t i = 0; i < b.weapons.size(); ++i) {
      const auto& c = b.weapons[i];
      out += "| " + std::to_string(i + 1) + " | " + c.id + " | " + cell(c.name) + " | " +
             cell(c.category) + " | " + std::to_string(c.power) + " | " + cell(c.description) +
             " |\n";
    }
    out += "\n";
  }

  if (b.battle) {
    out += "## The Battle\n\n";
    int n = 1;
    for (const auto& p : b.battle->plays) {
      std::string name = p.card_id;
      for (const auto& c : b.weapons) {
        if (c.id == p.card_id) name = c.name;
      }
      out += std::to_string(n++) + ". **" + md(name) + "** (" + p.card_id + ", " +
             std::to_string(p.damage) + " damage)\n";
      out += "   - " + std::string(kStorytellerName) + ": \"" + md(p.player_line) + "\"\n";
      out += "   - King: \"" + md(p.king_line) + "\"\n";
      out += "   - " + md(p.effect_description) + " King's strength: " +
             std::to_string(p.king_hp_after) + "\n";
    }
    out += "\n";
  }

  if (b.ending) {
    out += "## The Ending\n\n";
    for (const auto& a : b.ending->actions) out += "- " + md(a) + "\n";
    out += "\n" + md(b.ending->downfall) + "\n\n";
    out += md(b.ending->narration) + "\n";
  }
  return out;
}

}  // namespace nights
