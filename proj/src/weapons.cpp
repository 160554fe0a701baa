#include "nights/weapons.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "nights/errors.hpp"
#include "nights/king.hpp"
#include "nights/structured.hpp"

namespace nights {

namespace {

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_';
}

bool is_lower_term(std::string_view t) {
  if (t.empty()) return false;
  return std::all_of(t.begin(), t.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return !(u >= 'A' && u <= 'Z');
  });
}

bool equals_ignore_case(std::string_view text, std::string_view lower_term) {
  if (text.size() != lower_term.size()) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) != static_cast<unsigned char>(lower_term[i])) {
      return false;
    }
  }
  return true;
}

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?' || c == ';'; }

std::string string_or(const json& obj, const char* key, std::string fallback, std::size_t max_chars) {
  const auto it = obj.find(key);
  if (it != obj.end() && it->is_string()) {
    std::string v(trim(it->get_ref<const std::string&>()));
    if (!v.empty()) return utf8_truncate(v, max_chars);
  }
  return fallback;
}

}  // namespace

WeaponLexicon::WeaponLexicon(std::vector<WeaponCategory> categories)
    : categories_(std::move(categories)) {
  if (categories_.size() != kCategories) {
    throw ValidationError("weapon lexicon needs exactly 7 categories, got " +
                          std::to_string(categories_.size()));
  }
  std::set<std::string> ids;
  std::set<std::string> terms;
  for (const auto& c : categories_) {
    if (c.id.empty() || !ids.insert(c.id).second) {
      throw ValidationError("weapon category ids must be unique and non-empty");
    }
    std::vector<std::string> all = c.synonyms;
    all.push_back(c.canonical);
    for (const auto& t : all) {
      if (!is_lower_term(t)) throw ValidationError("lexicon terms must be lowercase: '" + t + "'");
      if (!terms.insert(t).second) {
        throw ValidationError("lexicon term appears twice: '" + t + "'");
      }
    }
  }
}

const WeaponCategory* WeaponLexicon::find(std::string_view id) const {
  for (const auto& c : categories_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::vector<std::string> WeaponLexicon::canonical_terms() const {
  std::vector<std::string> out;
  for (const auto& c : categories_) out.push_back(c.canonical);
  return out;
}

WeaponLexicon default_lexicon() {
  // Only sword, shield and dagger are named by the game; the other four
  // categories and every synonym list are our own choices.
  return WeaponLexicon({
      {"sword", "sword", {"swords", "blade", "blades", "sabre", "saber", "scimitar", "scimitars"}},
      {"shield", "shield", {"shields", "buckler", "bucklers", "aegis"}},
      {"dagger", "dagger", {"daggers", "knife", "knives", "dirk", "khanjar"}},
      {"spear", "spear", {"spears", "lance", "lances", "javelin", "javelins", "pike"}},
      {"bow", "bow", {"bows", "longbow", "crossbow", "arrows"}},
      {"axe", "axe", {"axes", "hatchet", "battleaxe"}},
      {"hammer", "hammer", {"hammers", "mace", "maces", "maul", "warhammer"}},
  });
}

WeaponLexicon lexicon_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("categories") || !doc["categories"].is_array()) {
    throw ValidationError("lexicon document needs a \"categories\" array");
  }
  std::vector<WeaponCategory> cats;
  try {
    for (const auto& c : doc["categories"]) {
      cats.push_back({c.at("id").get<std::string>(), c.at("canonical").get<std::string>(),
                      c.value("synonyms", std::vector<std::string>{})});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed lexicon entry: ") + e.what());
  }
  return WeaponLexicon(std::move(cats));
}

WeaponLexicon load_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("lexicon not found: " + path);
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("lexicon is not valid JSON: " + path);
  return lexicon_from_json(doc);
}

std::string sentence_at(std::string_view text, std::size_t offset) {
  std::size_t begin = offset;
  while (begin > 0 && !is_sentence_end(text[begin - 1])) --begin;
  std::size_t end = offset;
  while (end < text.size() && !is_sentence_end(text[end])) ++end;
  if (end < text.size()) ++end;
  return std::string(trim(text.substr(begin, end - begin)));
}

std::optional<KeywordHit> detect_keyword(std::string_view text, const WeaponLexicon& lexicon) {
  struct Term {
    std::string_view term;
    const WeaponCategory* category;
  };
  std::vector<Term> terms;
  for (const auto& c : lexicon.categories()) {
    terms.push_back({c.canonical, &c});
    for (const auto& s : c.synonyms) terms.push_back({s, &c});
  }
  // Longer first; stable sort keeps lexicon order among equal lengths.
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.term.size() > b.term.size(); });

  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i > 0 && is_word_char(text[i - 1])) continue;
    for (const auto& t : terms) {
      const std::size_t end = i + t.term.size();
      if (end > text.size()) continue;
      if (!equals_ignore_case(text.substr(i, t.term.size()), t.term)) continue;
      if (end < text.size() && is_word_char(text[end])) continue;
      return KeywordHit{t.category->id, std::string(t.term), sentence_at(text, i), i};
    }
  }
  return std::nullopt;
}

int fallback_power(std::string_view name) {
  return WeaponCard::kMinPower + static_cast<int>(fnv1a64(name) % 31);
}

WeaponCard parse_card(std::string_view raw, const KeywordHit& hit) {
  const auto usable = [](const json& o) {
    const auto text_field = [&](const char* key) {
      const auto it = o.find(key);
      return it != o.end() && it->is_string() && !trim(it->get_ref<const std::string&>()).empty();
    };
    return text_field("name") && text_field("description");
  };
  const auto obj = extract_json_object(raw, usable);
  if (!obj) {
    throw ContractError("reply must contain a JSON object with non-empty name and description");
  }

  WeaponCard card;
  card.category = hit.category_id;
  card.source_excerpt = hit.sentence;
  card.name = string_or(*obj, "name", "", WeaponCard::kMaxName);
  card.description = string_or(*obj, "description", "", WeaponCard::kMaxDescription);

  const auto power = obj->find("power");
  if (power != obj->end() && power->is_number_integer()) {
    const long double v = power->is_number_unsigned()
                              ? static_cast<long double>(power->get<std::uint64_t>())
                              : static_cast<long double>(power->get<std::int64_t>());
    card.power = static_cast<int>(
        std::clamp<long double>(v, WeaponCard::kMinPower, WeaponCard::kMaxPower));
  } else {
    card.power = fallback_power(card.name);
  }

  card.effect_description =
      string_or(*obj, "effect_description", "The " + card.name + " answers its bearer's call.", 600);
  card.player_line = string_or(*obj, "player_line", "Behold, my King: the " + card.name + "!", 400);
  card.king_line = string_or(*obj, "king_line", "What sorcery is this?", 400);
  return card;
}

std::vector<std::string> card_violations(const WeaponCard& card, const WeaponLexicon& lexicon) {
  std::vector<std::string> out;
  if (card.power < WeaponCard::kMinPower || card.power > WeaponCard::kMaxPower) {
    out.push_back("power outside [10,40]");
  }
  if (card.name.empty() || utf8_length(card.name) > WeaponCard::kMaxName) out.push_back("bad name");
  if (card.description.empty() || utf8_length(card.description) > WeaponCard::kMaxDescription) {
    out.push_back("bad description");
  }
  const WeaponCategory* cat = lexicon.find(card.category);
  if (cat == nullptr) {
    out.push_back("unknown category " + card.category);
    return out;
  }
  const std::string excerpt = ascii_lower(card.source_excerpt);
  bool found = excerpt.find(cat->canonical) != std::string::npos;
  for (const auto& s : cat->synonyms) found = found || excerpt.find(s) != std::string::npos;
  if (!found) out.push_back("source excerpt lacks a term of " + card.category);
  return out;
}

GenerationRequest card_request(const ForgeRequest& forge, const WeaponLexicon& lexicon) {
  const WeaponCategory* cat = lexicon.find(forge.hit.category_id);
  const std::string category = cat ? cat->canonical : forge.hit.category_id;
  std::string system =
      "You are the royal armorer of an ancient court. From the tale told so far, forge a "
      "weapon of the requested kind that belongs to this story.\n"
      "Reply with one JSON object and nothing else:\n"
      "{\"name\": \"weapon name, at most 60 characters\",\n"
      " \"description\": \"what it is and where it came from in the tale, at most 300 characters\",\n"
      " \"power\": integer from 10 to 40,\n"
      " \"effect_description\": \"what happens when it is used in battle\",\n"
      " \"player_line\": \"what the storyteller cries when wielding it against the King\",\n"
      " \"king_line\": \"the King's retort when struck by it\"}\n";
  std::string user = "The story record:\n" + transcript_window(forge.story, 3000) +
                     "\n\nWeapon kind: " + category +
                     "\nThe King's words that summoned it: " + forge.hit.sentence;
  return GenerationRequest::chat(std::move(system), {{"user", std::move(user)}}, 0.8,
                                 Purpose::card);
}

const WeaponCard& forge_card(GameSession& session, const KeywordHit& hit, Backend& backend,
                             const WeaponLexicon& lexicon) {
  if (session.weapons.size() >= kWeaponSlots) throw CapacityError();

  GenerationRequest request = card_request({session.turns, hit}, lexicon);
  request.seed = session.seed + session.turns.size();
  std::string reply = backend.generate(request).text;
  WeaponCard card;
  try {
    card = parse_card(reply, hit);
  } catch (const ContractError& e) {
    request.messages = repair_messages(request.messages, reply, e.what());
    reply = backend.generate(request).text;
    card = parse_card(reply, hit);
  }
  card.id = "card-" + hex64(mix64(fnv1a64(session.id) ^ session.weapons.size())).substr(0, 12);
  card.artwork = session.background;
  session.weapons.push_back(std::move(card));
  return session.weapons.back();
}

}  // namespace nights
