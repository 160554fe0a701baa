#include <cstdlib>
#include <sstream>

#include "nights/app.hpp"

namespace nights {

BackendKind backend_kind_from_string(const std::string& s) {
  if (s == "remote") return BackendKind::remote;
  if (s == "scripted") return BackendKind::scripted;
  if (s == "placeholder") return BackendKind::placeholder;
  throw ValidationError("BACKEND_KIND must be remote, scripted or placeholder (got '" + s + "')");
}

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

template <typename T>
T parse_number(const std::string& name, const std::string& text) {
  std::istringstream in(text);
  T v{};
  if (!(in >> v) || !in.eof()) throw ValidationError(name + " is not a number: " + text);
  return v;
}

}  // namespace

Config config_from_env() {
  Config c;
  if (auto v = env("BACKEND_KIND")) c.backend = backend_kind_from_string(*v);
  if (auto v = env("CHAT_BASE_URL")) c.chat_base_url = *v;
  if (auto v = env("CHAT_MODEL")) c.chat_model = *v;
  if (auto v = env("CHAT_API_KEY")) c.chat_api_key = *v;
  if (auto v = env("IMAGE_BASE_URL")) c.image_base_url = *v;
  if (auto v = env("DATA_DIR")) c.data_dir = *v;
  if (auto v = env("SEED")) c.seed = parse_number<std::uint64_t>("SEED", *v);
  if (auto v = env("SCRIPT_PATH")) c.script_path = *v;
  if (auto v = env("PORT")) c.port = parse_number<int>("PORT", *v);
  if (auto v = env("ANGER_LIMIT")) c.anger_limit = parse_number<int>("ANGER_LIMIT", *v);
  if (auto v = env("LEXICON_PATH")) c.lexicon_path = *v;
  if (auto v = env("FIXED_CLOCK")) c.fixed_clock = parse_iso8601(*v);
  if (auto v = env("CORS_ORIGINS")) {
    std::istringstream in(*v);
    for (std::string item; std::getline(in, item, ',');) {
      if (!trim(item).empty()) c.cors_origins.emplace_back(trim(item));
    }
  }
  return c;
}

std::shared_ptr<Backend> make_backend(const Config& config, const WeaponLexicon& lexicon) {
  switch (config.backend) {
    case BackendKind::scripted: {
      if (config.script_path.empty()) throw ValidationError("scripted backend needs SCRIPT_PATH");
      return scripted_backend(load_script_file(config.script_path), config.strict_script,
                              config.seed.value_or(0), lexicon.canonical_terms());
    }
    case BackendKind::remote:
    case BackendKind::placeholder: {
      if (config.chat_base_url.empty()) throw ValidationError("remote chat needs CHAT_BASE_URL");
      RemoteConfig rc;
      rc.chat_base_url = config.chat_base_url;
      rc.chat_model = config.chat_model;
      rc.api_key = config.chat_api_key;
      if (config.backend == BackendKind::remote) {
        if (config.image_base_url.empty()) throw ValidationError("remote images need IMAGE_BASE_URL");
        rc.image_url = config.image_base_url;
      }
      rc.retry = config.retry;
      return std::make_shared<RemoteBackend>(std::move(rc));
    }
  }
  throw ValidationError("unknown backend kind");
}

std::shared_ptr<Engine> make_engine(const Config& config) {
  EngineOptions options;
  if (!config.lexicon_path.empty()) options.lexicon = load_lexicon_file(config.lexicon_path);
  if (config.anger_limit) options.persona.anger_limit = *config.anger_limit;
  auto backend = make_backend(config, options.lexicon);
  auto storage = std::make_shared<FileStorage>(config.data_dir);
  std::shared_ptr<const Clock> clock;
  if (config.fixed_clock) {
    clock = std::make_shared<FixedClock>(*config.fixed_clock);
  } else {
    clock = std::make_shared<SystemClock>();
  }
  return std::make_shared<Engine>(std::move(backend), std::move(storage), std::move(clock),
                                  std::move(options));
}

}  // namespace nights
