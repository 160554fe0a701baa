#include "nights/backend.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"
#include "nights/errors.hpp"
#include "nights/png.hpp"

namespace nights {

using json = nlohmann::json;

GenerationRequest GenerationRequest::chat(std::string system, std::vector<ChatMessage> messages,
                                          double temperature, Purpose purpose) {
  GenerationRequest r;
  r.kind = GenerationKind::chat;
  r.system = std::move(system);
  r.messages = std::move(messages);
  r.temperature = temperature;
  r.purpose = purpose;
  return r;
}

GenerationRequest GenerationRequest::image(std::string prompt, std::optional<std::uint64_t> seed) {
  GenerationRequest r;
  r.kind = GenerationKind::image;
  r.prompt = std::move(prompt);
  r.seed = seed;
  r.temperature = 0.0;
  return r;
}

void GenerationRequest::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ValidationError("temperature must be within [0, 2]");
  }
  if (max_tokens <= 0) throw ValidationError("max_tokens must be positive");
  if (kind == GenerationKind::chat) {
    if (messages.empty()) throw ValidationError("chat request without messages");
  } else if (prompt.empty()) {
    throw ValidationError("image request without prompt");
  }
}

// ---------------------------------------------------------------------------
// Placeholder images

PlaceholderImages::Rgb PlaceholderImages::color_for(std::string_view prompt) {
  const std::uint64_t h = fnv1a64(prompt);
  return {static_cast<std::uint8_t>(h >> 16), static_cast<std::uint8_t>(h >> 8),
          static_cast<std::uint8_t>(h)};
}

std::string PlaceholderImages::render(std::string_view prompt) {
  const Rgb c = color_for(prompt);
  const std::uint32_t key = (std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b;
  std::lock_guard lock(mu_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (cache_.size() >= 64) cache_.erase(cache_.begin());
  return cache_[key] = encode_solid_png(kSize, kSize, c.r, c.g, c.b);
}

// ---------------------------------------------------------------------------
// Scripted backend

ScriptedBackend::ScriptedBackend(std::vector<std::string> script, bool strict, std::uint64_t seed,
                                 std::vector<std::string> keywords)
    : script_(std::move(script)), strict_(strict), seed_(seed), keywords_(std::move(keywords)) {
  if (keywords_.empty()) {
    keywords_ = {"sword", "shield", "dagger", "spear", "bow", "axe", "hammer"};
  }
}

std::shared_ptr<ScriptedBackend> scripted_backend(std::vector<std::string> script, bool strict,
                                                  std::uint64_t seed,
                                                  std::vector<std::string> keywords) {
  if (script.empty()) throw ValidationError("scripted backend needs at least one script step");
  return std::make_shared<ScriptedBackend>(std::move(script), strict, seed, std::move(keywords));
}

std::size_t ScriptedBackend::chat_calls() const {
  std::lock_guard lock(mu_);
  return next_ + fallback_count_;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return script_.size() - next_;
}

namespace {

std::string last_sentence(std::string_view text) {
  text = trim(text);
  while (!text.empty() && (text.back() == '.' || text.back() == '!' || text.back() == '?')) {
    text.remove_suffix(1);
  }
  const auto cut = text.find_last_of(".!?");
  if (cut != std::string_view::npos) text = text.substr(cut + 1);
  return std::string(trim(text));
}

}  // namespace

std::string ScriptedBackend::fallback(const GenerationRequest& request, std::size_t n) const {
  const std::string& keyword = keywords_[(seed_ + n) % keywords_.size()];
  switch (request.purpose) {
    case Purpose::card: {
      const int power = 10 + static_cast<int>(mix64(seed_ ^ (n + 1)) % 31);
      return json{{"name", "Night-forged relic " + std::to_string(n + 1)},
                  {"description", "A relic pulled from the King's own words."},
                  {"power", power},
                  {"effect_description", "It flashes like lamplight on water."},
                  {"player_line", "Remember your own tale, my King."},
                  {"king_line", "You turn my words against me!"}}
          .dump();
    }
    case Purpose::ending: {
      return json{{"actions", {"The first blow fell.", "The second blow fell.",
                               "The third blow fell.", "The fourth blow fell."}},
                  {"downfall", "The King's tale ran out before the dawn did."},
                  {"title", "Teller of a Thousand Nights"},
                  {"narration", "And so the nights were counted, and the tale was kept."}}
          .dump();
    }
    case Purpose::verdict:
    case Purpose::none:
      break;
  }
  std::string echo;
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == "user") {
      echo = last_sentence(it->content);
      break;
    }
  }
  std::string text = "The King pondered…";
  if (!echo.empty()) text += " \"" + echo + ",\" he repeated.";
  text += " Then he spoke of a " + keyword + " kept in the palace vault.";
  if (request.purpose == Purpose::none) return text;
  return json{{"kind", "continue"}, {"comment", "Go on."}, {"continuation", text}, {"mood_delta", 0}}
      .dump();
}

GenerationResult ScriptedBackend::generate(const GenerationRequest& request) {
  request.validate();
  GenerationResult result;
  result.kind = request.kind;
  result.backend_id = id();
  if (request.kind == GenerationKind::image) {
    result.image_png = images_.render(request.prompt);
    return result;
  }
  std::lock_guard lock(mu_);
  if (next_ < script_.size()) {
    result.text = script_[next_++];
    return result;
  }
  if (strict_) {
    throw BackendError(BackendFailure::script_exhausted,
                       "script has " + std::to_string(script_.size()) + " steps");
  }
  result.text = fallback(request, fallback_count_++);
  return result;
}

std::vector<std::string> load_script_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("script not found: " + path);
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_array()) throw ValidationError("script must be a JSON array of strings: " + path);
  std::vector<std::string> steps;
  for (const auto& item : doc) {
    if (!item.is_string()) throw ValidationError("script entries must be strings: " + path);
    steps.push_back(item.get<std::string>());
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Remote backend

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("URL without scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.retry.max_attempts < 1) config_.retry.max_attempts = 1;
}

RemoteBackend::Reply RemoteBackend::post_with_retry(const std::string& url, const std::string& body,
                                                    bool want_json) {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const auto deadline = started + config_.retry.deadline;
  const UrlParts parts = split_url(url);

  std::optional<BackendError> last;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left.count() <= 0) {
      throw BackendError(BackendFailure::timeout, "deadline exceeded before attempt " +
                                                      std::to_string(attempt));
    }
    httplib::Client client(parts.origin);
    client.set_connection_timeout(left);
    client.set_read_timeout(left);
    client.set_write_timeout(left);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    if (want_json) headers.emplace("Accept", "application/json");

    ++attempts_;
    auto res = client.Post(parts.path, headers, body, "application/json");
    bool retryable = true;
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                             err == httplib::Error::ConnectionTimeout;
      last.emplace(timed_out ? BackendFailure::timeout : BackendFailure::transport,
                   httplib::to_string(err));
    } else if (res->status >= 200 && res->status < 300) {
      return {res->status, res->body};
    } else if (res->status == 429) {
      last.emplace(BackendFailure::quota, "HTTP 429");
    } else {
      last.emplace(BackendFailure::http_status, "HTTP " + std::to_string(res->status));
      retryable = res->status >= 500 || res->status == 408;
    }
    spdlog::warn("backend attempt {}/{} to {} failed: {}", attempt, config_.retry.max_attempts,
                 url, last->what());
    if (!retryable || attempt == config_.retry.max_attempts) break;

    const auto backoff = config_.retry.base_backoff * (1 << (attempt - 1));
    if (clock::now() + backoff >= deadline) {
      throw BackendError(BackendFailure::timeout, std::string("deadline exceeded after ") +
                                                      last->what());
    }
    std::this_thread::sleep_for(backoff);
  }
  throw *last;
}

GenerationResult RemoteBackend::generate(const GenerationRequest& request) {
  request.validate();
  const auto started = std::chrono::steady_clock::now();
  GenerationResult result;
  result.kind = request.kind;
  result.backend_id = id();

  if (request.kind == GenerationKind::chat) {
    json messages = json::array();
    if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    json body{{"model", config_.chat_model},
              {"messages", messages},
              {"max_tokens", request.max_tokens},
              {"temperature", request.temperature}};
    if (request.seed) body["seed"] = *request.seed;

    const std::string base = split_url(config_.chat_base_url).path;
    const bool has_v1 = base.size() >= 3 && base.compare(base.size() - 3, 3, "/v1") == 0;
    std::string url = config_.chat_base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    url += has_v1 ? "/chat/completions" : "/v1/chat/completions";

    const Reply reply = post_with_retry(url, body.dump(), true);
    const json doc = json::parse(reply.body, nullptr, false);
    const json* content = nullptr;
    if (doc.is_object() && doc.contains("choices") && doc["choices"].is_array() &&
        !doc["choices"].empty()) {
      const auto& choice = doc["choices"][0];
      if (choice.is_object() && choice.contains("message") && choice["message"].is_object() &&
          choice["message"].contains("content") && choice["message"]["content"].is_string()) {
        content = &choice["message"]["content"];
      }
    }
    if (content == nullptr) {
      throw BackendError(BackendFailure::protocol, "response is not a chat completion document");
    }
    result.text = content->get<std::string>();
  } else if (config_.image_url.empty()) {
    result.image_png = images_.render(request.prompt);
  } else {
    json body{{"prompt", request.prompt}, {"seed", request.seed.value_or(0)}};
    Reply reply = post_with_retry(config_.image_url, body.dump(), false);
    if (reply.body.rfind("\x89PNG", 0) != 0) {
      throw BackendError(BackendFailure::protocol, "image endpoint did not return PNG bytes");
    }
    result.image_png = std::move(reply.body);
  }
  result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  return result;
}

}  // namespace nights
