#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nights/session.hpp"

namespace httplib {
class Server;
}

namespace nights {

enum class BackendKind { remote, scripted, placeholder };

BackendKind backend_kind_from_string(const std::string& s);

/// Runtime configuration; see config_from_env for the variable names.
struct Config {
  BackendKind backend = BackendKind::scripted;
  std::string chat_base_url;
  std::string chat_model = "glm-4";
  std::string chat_api_key;
  std::string image_base_url;
  std::string data_dir = "./data";
  std::optional<std::uint64_t> seed;
  std::string script_path;
  bool strict_script = false;
  int port = 8080;
  std::optional<int> anger_limit;
  std::string lexicon_path;
  /// Empty = allow any origin.
  std::vector<std::string> cors_origins;
  /// Pins every timestamp (golden runs).
  std::optional<Timestamp> fixed_clock;
  RetryPolicy retry;
};

/// BACKEND_KIND, CHAT_BASE_URL, CHAT_MODEL, CHAT_API_KEY, IMAGE_BASE_URL,
/// DATA_DIR, SEED, SCRIPT_PATH, PORT, ANGER_LIMIT, LEXICON_PATH,
/// CORS_ORIGINS (comma separated), FIXED_CLOCK. Throws ValidationError.
Config config_from_env();

/// Throws NotFound("script not found: ...") for a missing script file.
std::shared_ptr<Backend> make_backend(const Config& config, const WeaponLexicon& lexicon);

std::shared_ptr<Engine> make_engine(const Config& config);

// ---------------------------------------------------------------------------
// HTTP API v1

struct ApiError {
  std::string code;  // wrong_phase | contract_error | backend_error | not_found | busy | validation
  std::string message;
  bool retryable = false;
  int status = 500;
};

ApiError to_api_error(const std::exception& e);
void to_json(json& j, const ApiError& e);

/// Session document plus UI conveniences (cards, background_url).
json session_view(const GameSession& s);

struct ServiceOptions {
  std::vector<std::string> cors_origins;
  std::string data_dir;
};

/// Registers every route on `server`.
void install_routes(httplib::Server& server, std::shared_ptr<Engine> engine, ServiceOptions options);

/// Blocks until SIGINT/SIGTERM; returns a process exit code.
int serve(const Config& config);

// ---------------------------------------------------------------------------
// Terminal client

struct PlayOptions {
  Config config;
  std::string inputs_path;  // empty = read from `in`
};

int cli_play(const PlayOptions& options, std::istream& in, std::ostream& out, std::ostream& err);
int cli_replay(const std::string& storybook_path, std::ostream& out, std::ostream& err);

}  // namespace nights
