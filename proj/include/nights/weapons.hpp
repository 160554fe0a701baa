#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nights/backend.hpp"
#include "nights/model.hpp"

namespace nights {

struct WeaponCategory {
  std::string id;
  std::string canonical;
  std::vector<std::string> synonyms;

  bool operator==(const WeaponCategory&) const = default;
};

/// Exactly seven categories; terms lowercase and unique across categories.
class WeaponLexicon {
 public:
  static constexpr std::size_t kCategories = 7;

  /// Throws ValidationError when the invariants do not hold.
  explicit WeaponLexicon(std::vector<WeaponCategory> categories);

  const std::vector<WeaponCategory>& categories() const { return categories_; }
  const WeaponCategory* find(std::string_view id) const;
  /// Canonical terms in lexicon order.
  std::vector<std::string> canonical_terms() const;

 private:
  std::vector<WeaponCategory> categories_;
};

WeaponLexicon default_lexicon();

/// Parses `{"categories":[{"id","canonical","synonyms"}]}`.
WeaponLexicon lexicon_from_json(const json& doc);
WeaponLexicon load_lexicon_file(const std::string& path);

struct KeywordHit {
  std::string category_id;
  std::string matched_term;
  std::string sentence;
  std::size_t offset = 0;

  bool operator==(const KeywordHit&) const = default;
};

/// Earliest case-insensitive whole-word occurrence of any lexicon term.
/// Ties at one offset prefer the longer term, then lexicon order.
std::optional<KeywordHit> detect_keyword(std::string_view text, const WeaponLexicon& lexicon);

/// The sentence (split on . ! ? ;) that contains byte `offset`, trimmed,
/// including its closing delimiter when present.
std::string sentence_at(std::string_view text, std::size_t offset);

/// Power used when the backend gives none or a non-integer one.
int fallback_power(std::string_view name);

/// Reads a card reply; throws ContractError when it has no usable name and
/// description. Never returns a card that breaks WeaponCard invariants.
WeaponCard parse_card(std::string_view raw, const KeywordHit& hit);

/// Broken WeaponCard invariants, for tests and load-time checks.
std::vector<std::string> card_violations(const WeaponCard& card, const WeaponLexicon& lexicon);

struct ForgeRequest {
  std::span<const StoryTurn> story;
  KeywordHit hit;
};

GenerationRequest card_request(const ForgeRequest& forge, const WeaponLexicon& lexicon);

/// Asks the backend for a card (one repair retry on ContractError), gives it
/// a deterministic id and the current background as artwork, and appends it
/// to the session. Throws CapacityError when four cards are already held,
/// ContractError when the retry also fails, BackendError on transport
/// failure. The session is untouched when it throws.
const WeaponCard& forge_card(GameSession& session, const KeywordHit& hit, Backend& backend,
                             const WeaponLexicon& lexicon);

}  // namespace nights
