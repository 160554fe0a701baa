#include <fstream>
#include <iostream>
#include <sstream>

#include "nights/app.hpp"

namespace nights {

namespace {

// Lines come from the inputs file when given, otherwise from the terminal.
class LineSource {
 public:
  LineSource(std::istream& interactive, std::ostream& out, std::istream* file)
      : in_(file ? *file : interactive), out_(out), echo_(file != nullptr) {}

  std::optional<std::string> next(const std::string& prompt) {
    out_ << prompt << std::flush;
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (echo_ && trim(line).empty()) continue;
      if (echo_) out_ << line << "\n";
      return line;
    }
    out_ << "\n";
    return std::nullopt;
  }

 private:
  std::istream& in_;
  std::ostream& out_;
  bool echo_;
};

void print_card(std::ostream& out, std::size_t n, const WeaponCard& c) {
  out << "  [" << n << "] " << c.name << " (" << c.category << ", power " << c.power << ")  "
      << c.id << "\n      " << c.description << "\n";
}

void print_ending(std::ostream& out, const Storybook& book) {
  out << "\n=== " << (book.ending ? book.ending->title : std::string("The tale ends")) << " ===\n";
  if (book.ending) {
    for (const auto& a : book.ending->actions) out << "  * " << a << "\n";
    out << "\n" << book.ending->downfall << "\n\n" << book.ending->narration << "\n";
  }
  out << "\nOutcome: " << book.outcome << "\n";
}

const WeaponCard* pick_card(const GameSession& s, const std::string& choice) {
  const auto is_played = [&](const WeaponCard& c) {
    return std::any_of(s.battle->plays.begin(), s.battle->plays.end(),
                       [&](const BattlePlay& p) { return p.card_id == c.id; });
  };
  const std::string_view t = trim(choice);
  if (t.empty()) {
    for (const auto& c : s.weapons) {
      if (!is_played(c)) return &c;
    }
    return nullptr;
  }
  if (const WeaponCard* by_id = s.find_card(t)) return by_id;
  try {
    const std::size_t idx = std::stoul(std::string(t));
    if (idx >= 1 && idx <= s.weapons.size()) return &s.weapons[idx - 1];
  } catch (const std::exception&) {
  }
  return nullptr;
}

}  // namespace

int cli_play(const PlayOptions& options, std::istream& in, std::ostream& out, std::ostream& err) {
  const Config& config = options.config;
  std::ifstream inputs;
  if (!options.inputs_path.empty()) {
    inputs.open(options.inputs_path);
    if (!inputs) {
      err << "inputs not found: " << options.inputs_path << "\n";
      return 2;
    }
  }

  std::shared_ptr<Engine> engine;
  try {
    engine = make_engine(config);
  } catch (const NotFound& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "startup failed: " << e.what() << "\n";
    return 1;
  }

  LineSource lines(in, out, inputs.is_open() ? &inputs : nullptr);
  try {
    const GameSession created = engine->create_session(config.seed);
    const std::string id = created.id;
    out << "King " << created.persona.name << " awaits your tale. (session " << id << ", seed "
        << created.seed << ")\nType /quit to give up.\n";

    for (;;) {
      const GameSession s = engine->get(id);
      if (s.phase == Phase::storytelling()) {
        auto line = lines.next("\n[mood " + std::to_string(s.mood) + ", weapons " +
                               std::to_string(s.weapons.size()) + "/4] > ");
        if (!line || trim(*line) == "/quit") {
          out << (line ? "You fall silent." : "No more words; the tale is abandoned.") << "\n";
          engine->close(id, /*abandon_if_live=*/true);
          continue;
        }
        try {
          const TurnOutcome t = engine->submit_turn(id, *line);
          out << "King (" << wire_name(t.verdict.kind) << ", mood "
              << (t.verdict.mood_delta >= 0 ? "+" : "") << t.verdict.mood_delta
              << "): " << t.verdict.comment << "\n";
          if (t.verdict.continuation) out << "  " << t.king_text << "\n";
          if (t.new_card) {
            out << "A weapon materializes!\n";
            print_card(out, engine->get(id).weapons.size(), *t.new_card);
          }
        } catch (const ValidationError& e) {
          out << "(" << e.what() << ")\n";
        }
      } else if (s.phase == Phase::battle()) {
        out << "\nThe King's strength: " << s.battle->king_hp << ". Choose a weapon:\n";
        for (std::size_t i = 0; i < s.weapons.size(); ++i) print_card(out, i + 1, s.weapons[i]);
        auto line = lines.next("battle> ");
        const WeaponCard* card = pick_card(s, line.value_or(""));
        if (!card) {
          out << "(no such card)\n";
          if (!line) return 1;
          continue;
        }
        try {
          const BattlePlay p = engine->play_card(id, card->id);
          out << "You raise " << card->name << ": \"" << p.player_line << "\"\n"
              << "King: \"" << p.king_line << "\"\n"
              << p.effect_description << " (-" << p.damage << ", King at " << p.king_hp_after
              << ")\n";
        } catch (const AlreadyPlayed& e) {
          out << "(" << e.what() << ")\n";
        }
      } else {
        const Storybook book = engine->close(id);
        print_ending(out, book);
        const auto& storage = dynamic_cast<FileStorage&>(engine->storage());
        out << "Storybook: " << storage.storybook_path(id, false).string() << "\n"
            << "           " << storage.storybook_path(id, true).string() << "\n";
        return 0;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_replay(const std::string& storybook_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(storybook_path);
  if (!in) {
    err << "storybook not found: " << storybook_path << "\n";
    return 2;
  }
  std::ostringstream text;
  text << in.rdbuf();
  try {
    out << render_markdown(parse_storybook(text.str()));
  } catch (const std::exception& e) {
    err << "cannot read storybook: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace nights
