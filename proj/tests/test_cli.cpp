#include <sstream>

#include "doctest.h"
#include "nights/app.hpp"
#include "support/fixtures.hpp"

using namespace nights;

namespace {

const std::string kSource = NIGHTS_SOURCE_DIR;

PlayOptions demo_options(const std::filesystem::path& data_dir) {
  PlayOptions o;
  o.config.backend = BackendKind::scripted;
  o.config.script_path = kSource + "/data/demo/script.json";
  o.config.strict_script = true;
  o.config.seed = 42;
  o.config.data_dir = data_dir.string();
  o.config.fixed_clock = fixtures::fixed_time();
  o.inputs_path = kSource + "/data/demo/inputs.txt";
  return o;
}

std::filesystem::path only_file(const std::filesystem::path& dir, const std::string& ext) {
  std::vector<std::filesystem::path> found;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ext) found.push_back(e.path());
  }
  REQUIRE(found.size() == 1);
  return found[0];
}

}  // namespace

TEST_CASE("demo playthrough reproduces the golden storybook") {
  fixtures::TempDir dir;
  std::istringstream in;
  std::ostringstream out, err;
  REQUIRE(cli_play(demo_options(dir.path), in, out, err) == 0);
  CHECK(err.str().empty());
  CHECK(out.str().find("Outcome: victory") != std::string::npos);
  const auto book = read_file(only_file(dir.path / "storybooks", ".json"));
  const auto golden = read_file(kSource + "/tests/golden/storybook_seed42.json");
  REQUIRE(book);
  REQUIRE(golden);
  CHECK(*book == *golden);
}

TEST_CASE("replay renders a stored storybook") {
  std::ostringstream out, err;
  CHECK(cli_replay(kSource + "/tests/golden/storybook_seed42.json", out, err) == 0);
  CHECK(out.str().rfind("# Shahrzad of the Copper Pot", 0) == 0);
  CHECK(out.str().find("## The Battle") != std::string::npos);
  std::ostringstream out2, err2;
  CHECK(cli_replay("/nonexistent/book.json", out2, err2) == 2);
  CHECK(err2.str().find("storybook not found") != std::string::npos);
}

TEST_CASE("missing script exits 2 before any session is created") {
  fixtures::TempDir dir;
  auto options = demo_options(dir.path);
  options.config.script_path = (dir.path / "nope.json").string();
  std::istringstream in;
  std::ostringstream out, err;
  CHECK(cli_play(options, in, out, err) == 2);
  CHECK(err.str().find("script not found") != std::string::npos);
  const bool any_session =
      std::filesystem::exists(dir.path / "sessions") && !std::filesystem::is_empty(dir.path / "sessions");
  CHECK_FALSE(any_session);
}

TEST_CASE("end of input during storytelling abandons the tale") {
  fixtures::TempDir dir;
  auto options = demo_options(dir.path);
  options.inputs_path.clear();
  std::istringstream in("Once, a humble chef came to serve the caliph of Baghdad.\n");
  std::ostringstream out, err;
  CHECK(cli_play(options, in, out, err) == 0);
  CHECK(out.str().find("Outcome: abandoned") != std::string::npos);
  const auto book = parse_storybook(*read_file(only_file(dir.path / "storybooks", ".json")));
  CHECK(book.outcome == "abandoned");
  CHECK(book.turns.size() == 2);
}

TEST_CASE("/quit abandons and an empty battle line plays the next card") {
  fixtures::TempDir dir;
  auto options = demo_options(dir.path);
  options.inputs_path.clear();
  options.config.strict_script = false;
  options.config.script_path = (dir.path / "one.json").string();
  std::ofstream(options.config.script_path) << json::array({fixtures::continue_verdict("The court listened.")}).dump();
  // After the script runs out, every fallback continuation names a weapon.
  std::istringstream in("a\nb\nc\nd\ne\n\n\n\n\n");
  std::ostringstream out, err;
  CHECK(cli_play(options, in, out, err) == 0);
  CHECK(out.str().find("Outcome: ") != std::string::npos);
  CHECK(out.str().find("King at ") != std::string::npos);

  fixtures::TempDir dir2;
  auto quit = demo_options(dir2.path);
  quit.inputs_path.clear();
  std::istringstream q("/quit\n");
  std::ostringstream qout, qerr;
  CHECK(cli_play(quit, q, qout, qerr) == 0);
  CHECK(qout.str().find("You fall silent.") != std::string::npos);
}
