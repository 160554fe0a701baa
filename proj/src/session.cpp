#include "nights/session.hpp"

#include <random>

#include <spdlog/spdlog.h>

#include "nights/battle.hpp"

namespace nights {

const char* to_string(PhaseEvent e) {
  switch (e) {
    case PhaseEvent::fourth_weapon: return "fourth_weapon";
    case PhaseEvent::anger_exhausted: return "anger_exhausted";
    case PhaseEvent::all_cards_played: return "all_cards_played";
    case PhaseEvent::close_victory: return "close_victory";
    case PhaseEvent::close_dawn: return "close_dawn";
    case PhaseEvent::abandon: return "abandon";
  }
  return "unknown";
}

IllegalTransition::IllegalTransition(Phase from, PhaseEvent event, const std::string& why)
    : Error("illegal transition: " + to_string(from) + " on " + to_string(event) +
            (why.empty() ? "" : " (" + why + ")")),
      from_(from),
      event_(event) {}

std::optional<Phase> transition(Phase from, PhaseEvent event) {
  using S = Phase::Stage;
  if (event == PhaseEvent::abandon && !from.is_closed()) return Phase::closed(Outcome::abandoned);
  switch (from.stage()) {
    case S::storytelling:
      if (event == PhaseEvent::fourth_weapon) return Phase::battle();
      if (event == PhaseEvent::anger_exhausted) return Phase::closed(Outcome::dawn);
      break;
    case S::battle:
      if (event == PhaseEvent::all_cards_played) return Phase::ending();
      break;
    case S::ending:
      if (event == PhaseEvent::close_victory) return Phase::closed(Outcome::victory);
      if (event == PhaseEvent::close_dawn) return Phase::closed(Outcome::dawn);
      break;
    case S::closed:
      break;
  }
  return std::nullopt;
}

namespace {

// The Closed outcome an event leads to, for the idempotent terminal case.
std::optional<Outcome> terminal_outcome(PhaseEvent e) {
  switch (e) {
    case PhaseEvent::abandon: return Outcome::abandoned;
    case PhaseEvent::close_victory: return Outcome::victory;
    case PhaseEvent::close_dawn:
    case PhaseEvent::anger_exhausted: return Outcome::dawn;
    default: return std::nullopt;
  }
}

}  // namespace

Phase advance_phase(GameSession& s, PhaseEvent event) {
  if (s.phase.is_closed()) {
    if (terminal_outcome(event) == s.phase.outcome()) return s.phase;
    throw IllegalTransition(s.phase, event, "session is closed");
  }
  const auto next = transition(s.phase, event);
  if (!next) throw IllegalTransition(s.phase, event);

  const bool battle_resolved = s.battle && s.battle->outcome.has_value();
  switch (event) {
    case PhaseEvent::fourth_weapon:
      if (s.weapons.size() != kWeaponSlots) throw IllegalTransition(s.phase, event, "fewer than four weapons");
      break;
    case PhaseEvent::anger_exhausted:
      if (s.anger_count < s.persona.anger_limit) throw IllegalTransition(s.phase, event, "anger limit not reached");
      break;
    case PhaseEvent::all_cards_played:
      if (!s.battle || s.battle->round != BattleState::kRounds) {
        throw IllegalTransition(s.phase, event, "battle not finished");
      }
      break;
    case PhaseEvent::close_victory:
      if (!s.ending || !battle_resolved || s.battle->outcome != BattleResult::victory) {
        throw IllegalTransition(s.phase, event, "no victorious ending");
      }
      break;
    case PhaseEvent::close_dawn:
      if (!s.ending || !battle_resolved || s.battle->outcome != BattleResult::defeat) {
        throw IllegalTransition(s.phase, event, "no defeat ending");
      }
      break;
    case PhaseEvent::abandon:
      break;
  }
  s.phase = *next;
  return s.phase;
}

void to_json(json& j, const TurnOutcome& v) {
  j = {{"verdict", v.verdict},
       {"king_text", v.king_text},
       {"new_card", v.new_card ? json(*v.new_card) : json(nullptr)},
       {"phase", to_string(v.phase)}};
}

GameSession new_session(std::string id, std::uint64_t seed, PersonaConfig persona, Timestamp now) {
  persona.validate();
  GameSession s;
  s.id = std::move(id);
  s.seed = seed;
  s.persona = std::move(persona);
  s.created_at = now;
  s.updated_at = now;
  return s;
}

SceneImageRef paint_scene(std::string_view story_excerpt, std::string_view style_suffix,
                          const std::string& image_id, std::optional<std::uint64_t> seed,
                          TurnContext& ctx) {
  const std::string excerpt = utf8_truncate(trim(story_excerpt), kSceneExcerpt);
  if (excerpt.empty()) throw ValidationError("scene excerpt is empty");
  std::string prompt = excerpt + ", " + std::string(style_suffix);
  const GenerationResult result = ctx.backend.generate(GenerationRequest::image(prompt, seed));
  SceneImageRef ref;
  ref.id = image_id;
  ref.path_or_url = ctx.storage.save_image(image_id, result.image_png);
  ref.prompt_used = std::move(prompt);
  ref.created_at = ctx.clock.now();
  return ref;
}

namespace {

std::string image_id_for(const GameSession& s) {
  return "scene-" + hex64(mix64(fnv1a64(s.id) + s.images_painted)).substr(0, 12);
}

GenerationRequest verdict_request(const GameSession& s, std::string_view text, const TurnContext& ctx) {
  const PromptBundle bundle = build_evaluation_prompt(s.persona, s.turns, text, ctx.transcript_budget);
  auto request = GenerationRequest::chat(bundle.system, bundle.messages, 0.8, Purpose::verdict);
  request.seed = s.seed + s.turns.size();
  return request;
}

KingVerdict ask_king(const GameSession& s, std::string_view text, TurnContext& ctx) {
  GenerationRequest request = verdict_request(s, text, ctx);
  const std::string reply = ctx.backend.generate(request).text;
  try {
    return parse_verdict(reply);
  } catch (const ContractError& e) {
    spdlog::info("verdict rejected ({}); asking for a repair", e.what());
    request.messages = repair_messages(request.messages, reply, e.what());
    return parse_verdict(ctx.backend.generate(request).text);
  }
}

// Card + repaint for a committed King turn. Contract failures skip the card;
// transport failures propagate and roll the whole turn back.
std::optional<WeaponCard> materialize(GameSession& s, const KeywordHit& hit, TurnContext& ctx) {
  if (s.weapons.size() >= kWeaponSlots) return std::nullopt;
  try {
    forge_card(s, hit, ctx.backend, ctx.lexicon);
  } catch (const ContractError& e) {
    spdlog::warn("card for '{}' skipped: {}", hit.matched_term, e.what());
    return std::nullopt;
  }
  WeaponCard& card = s.weapons.back();
  s.turns.back().materialized_card = card.id;

  const std::string image_id = image_id_for(s);
  try {
    s.background = paint_scene(s.turns.back().text, ctx.style_suffix, image_id,
                               s.seed + s.images_painted, ctx);
    ++s.images_painted;
  } catch (const Error& e) {
    spdlog::warn("scene repaint failed, keeping previous background: {}", e.what());
  }
  card.artwork = s.background;

  if (s.weapons.size() == kWeaponSlots) {
    advance_phase(s, PhaseEvent::fourth_weapon);
    start_battle(s);
  }
  return card;
}

StoryTurn make_turn(const GameSession& s, Author author, std::string text) {
  StoryTurn t;
  t.index = s.turns.size();
  t.author = author;
  t.text = std::move(text);
  return t;
}

}  // namespace

TurnOutcome submit_player_turn(GameSession& session, std::string_view text, TurnContext& ctx) {
  if (session.phase != Phase::storytelling()) {
    throw WrongPhase("turns are only accepted while storytelling (phase is " +
                     to_string(session.phase) + ")");
  }
  const std::string_view trimmed = trim(text);
  if (trimmed.empty()) throw EmptyText();
  if (!is_valid_utf8(trimmed)) throw ValidationError("player text is not valid UTF-8");
  if (utf8_length(trimmed) > kMaxPlayerText) {
    throw ValidationError("player text exceeds 2000 characters");
  }

  GameSession s = session;
  const KingVerdict verdict = ask_king(s, trimmed, ctx);

  StoryTurn player = make_turn(s, Author::player, std::string(trimmed));
  player.verdict = verdict;
  player.rejected = verdict.rejects_turn();
  s.turns.push_back(std::move(player));
  s.mood = apply_mood(s.mood, verdict);

  TurnOutcome outcome;
  outcome.verdict = verdict;
  if (verdict.rejects_turn()) {
    s.turns.push_back(make_turn(s, Author::king, utf8_truncate(verdict.comment, kMaxPlayerText)));
    if (verdict.kind == VerdictKind::angry) ++s.anger_count;
    if (s.anger_count >= s.persona.anger_limit) advance_phase(s, PhaseEvent::anger_exhausted);
  } else {
    std::string king_text = utf8_truncate(trim(*verdict.continuation), kMaxPlayerText);
    s.turns.push_back(make_turn(s, Author::king, king_text));
    if (const auto hit = detect_keyword(king_text, ctx.lexicon)) {
      outcome.new_card = materialize(s, *hit, ctx);
    }
  }
  outcome.king_text = s.turns.back().text;

  ++s.revision;
  s.updated_at = ctx.clock.now();
  outcome.phase = s.phase;
  session = std::move(s);
  return outcome;
}

BattlePlay play_battle_card(GameSession& session, std::string_view card_id, TurnContext& ctx) {
  GameSession s = session;
  BattlePlay play = play_card(s, card_id);
  if (s.battle->round == BattleState::kRounds) {
    advance_phase(s, PhaseEvent::all_cards_played);
    s.ending = generate_ending(s, ctx.backend);
  }
  ++s.revision;
  s.updated_at = ctx.clock.now();
  session = std::move(s);
  return play;
}

Storybook assemble_storybook(GameSession& session, TurnContext& ctx) {
  if (session.phase.is_closed()) {
    if (const auto stored = ctx.storage.load_storybook(session.id, false)) {
      return parse_storybook(*stored);
    }
  } else if (session.phase != Phase::ending() || !session.ending) {
    throw WrongPhase("storybook needs a finished session (phase is " + to_string(session.phase) + ")");
  }

  GameSession s = session;
  if (!s.phase.is_closed()) {
    const bool won = s.battle && s.battle->outcome == BattleResult::victory;
    advance_phase(s, won ? PhaseEvent::close_victory : PhaseEvent::close_dawn);
    ++s.revision;
    s.updated_at = ctx.clock.now();
  }
  Storybook book = make_storybook(s, ctx.clock.now());
  ctx.storage.save_storybook(s.id, storybook_json(book), render_markdown(book));
  session = std::move(s);
  return book;
}

// ---------------------------------------------------------------------------
// Engine

std::string session_id_for(std::uint64_t seed, std::uint32_t n) {
  const std::uint64_t hi = mix64(seed);
  const std::uint64_t lo = mix64(hi ^ (0x5eed0000ULL + n));
  // Version-4 / variant bits so the id looks like any other UUID.
  return uuid_from((hi & ~0xF000ULL) | 0x4000ULL, (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL);
}

class Engine::SessionLock {
 public:
  explicit SessionLock(std::shared_ptr<std::mutex> mu) : mu_(std::move(mu)), lock_(*mu_, std::try_to_lock) {
    if (!lock_.owns_lock()) throw Busy("another operation on this session is in progress");
  }

 private:
  std::shared_ptr<std::mutex> mu_;
  std::unique_lock<std::mutex> lock_;
};

Engine::Engine(std::shared_ptr<Backend> backend, std::shared_ptr<Storage> storage,
               std::shared_ptr<const Clock> clock, EngineOptions options)
    : backend_(std::move(backend)),
      storage_(std::move(storage)),
      clock_(std::move(clock)),
      options_(std::move(options)) {
  options_.persona.validate();
}

Engine::SessionLock Engine::lock(const std::string& id) {
  std::shared_ptr<std::mutex> mu;
  {
    std::lock_guard guard(locks_mu_);
    auto& slot = locks_[id];
    if (!slot) slot = std::make_shared<std::mutex>();
    mu = slot;
  }
  return SessionLock(std::move(mu));
}

TurnContext Engine::context() {
  return TurnContext{*backend_, *storage_, *clock_, options_.lexicon, options_.style_suffix,
                     options_.transcript_budget};
}

GameSession Engine::load(const std::string& id) const {
  auto s = storage_->load_session(id);
  if (!s) throw NotFound("no such session: " + id);
  return std::move(*s);
}

void Engine::commit(GameSession& s) { storage_->save_session(s); }

GameSession Engine::create_session(std::optional<std::uint64_t> seed,
                                   std::optional<json> persona_overrides) {
  PersonaConfig persona = options_.persona;
  if (persona_overrides && !persona_overrides->is_null()) {
    try {
      from_json(*persona_overrides, persona);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("bad persona: ") + e.what());
    }
  }
  persona.validate();

  const std::uint64_t chosen = seed ? *seed : [] {
    std::random_device rd;
    return (std::uint64_t{rd()} << 32) ^ rd();
  }();

  std::lock_guard guard(create_mu_);
  std::uint32_t n = 0;
  while (storage_->session_exists(session_id_for(chosen, n))) ++n;
  GameSession s = new_session(session_id_for(chosen, n), chosen, std::move(persona), clock_->now());
  commit(s);
  return s;
}

GameSession Engine::get(const std::string& id) const { return load(id); }

TurnOutcome Engine::submit_turn(const std::string& id, std::string_view text) {
  auto guard = lock(id);
  GameSession s = load(id);
  auto ctx = context();
  TurnOutcome outcome = submit_player_turn(s, text, ctx);
  commit(s);
  return outcome;
}

BattlePlay Engine::play_card(const std::string& id, const std::string& card_id) {
  auto guard = lock(id);
  GameSession s = load(id);
  auto ctx = context();
  BattlePlay play = play_battle_card(s, card_id, ctx);
  commit(s);
  return play;
}

GameSession Engine::abandon(const std::string& id) {
  auto guard = lock(id);
  GameSession s = load(id);
  if (s.phase == Phase::closed(Outcome::abandoned)) return s;
  advance_phase(s, PhaseEvent::abandon);
  ++s.revision;
  s.updated_at = clock_->now();
  commit(s);
  return s;
}

Storybook Engine::close(const std::string& id, bool abandon_if_live) {
  auto guard = lock(id);
  GameSession s = load(id);
  const auto stage = s.phase.stage();
  if (abandon_if_live && (stage == Phase::Stage::storytelling || stage == Phase::Stage::battle)) {
    advance_phase(s, PhaseEvent::abandon);
    ++s.revision;
    s.updated_at = clock_->now();
  }
  auto ctx = context();
  Storybook book = assemble_storybook(s, ctx);
  commit(s);
  return book;
}

std::string Engine::storybook_text(const std::string& id, bool markdown) {
  if (auto text = storage_->load_storybook(id, markdown)) return *text;
  const GameSession s = load(id);
  if (!(s.phase.is_closed() || (s.phase == Phase::ending() && s.ending))) {
    throw WrongPhase("storybook not available yet (phase is " + to_string(s.phase) + ")");
  }
  close(id);
  if (auto text = storage_->load_storybook(id, markdown)) return *text;
  throw StorageError("storybook missing after assembly: " + id);
}

}  // namespace nights
