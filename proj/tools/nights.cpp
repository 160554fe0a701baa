// nights: service, terminal client and storybook viewer.

#include <iostream>

#include "CLI11.hpp"
#include "nights/app.hpp"

namespace {

void apply_common(CLI::App& cmd, nights::Config& config, std::string& backend,
                  std::string& clock, std::optional<std::uint64_t>& seed,
                  std::optional<int>& anger) {
  cmd.add_option("--backend", backend, "remote | scripted | placeholder");
  cmd.add_option("--script", config.script_path, "JSON array of canned backend outputs");
  cmd.add_flag("--strict", config.strict_script, "fail once the script runs out");
  cmd.add_option("--seed", seed, "session seed");
  cmd.add_option("--data-dir", config.data_dir, "where sessions, images and storybooks go");
  cmd.add_option("--clock", clock, "pin timestamps, e.g. 2025-01-01T00:00:00Z");
  cmd.add_option("--anger-limit", anger, "angry verdicts before the King ends the night");
  cmd.add_option("--lexicon", config.lexicon_path, "weapon lexicon override (JSON)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1001 Nights: tell the King a story, forge weapons from his words."};
  app.require_subcommand(1);

  nights::Config config;
  try {
    config = nights::config_from_env();
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  std::string backend;
  std::string clock;
  std::optional<std::uint64_t> seed;
  std::optional<int> anger;

  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  apply_common(*serve, config, backend, clock, seed, anger);
  serve->add_option("--port", config.port, "listen port");

  nights::PlayOptions play_options;
  auto* play = app.add_subcommand("play", "play in the terminal");
  apply_common(*play, config, backend, clock, seed, anger);
  play->add_option("--inputs", play_options.inputs_path, "read player lines from a file");

  std::string storybook;
  auto* replay = app.add_subcommand("replay", "print a recorded playthrough");
  replay->add_option("--storybook", storybook, "storybook JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!backend.empty()) config.backend = nights::backend_kind_from_string(backend);
    if (!clock.empty()) config.fixed_clock = nights::parse_iso8601(clock);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (seed) config.seed = seed;
  if (anger) config.anger_limit = anger;

  if (*serve) return nights::serve(config);
  if (*play) {
    play_options.config = config;
    return nights::cli_play(play_options, std::cin, std::cout, std::cerr);
  }
  return nights::cli_replay(storybook, std::cout, std::cerr);
}
