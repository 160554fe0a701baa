#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nights/util.hpp"

namespace nights {

enum class GenerationKind { chat, image };

/// What a chat call is for. Remote backends ignore it; the scripted
/// fallback uses it to shape a reply the caller can parse.
enum class Purpose { none, verdict, card, ending };

struct ChatMessage {
  std::string role;  // "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct GenerationRequest {
  GenerationKind kind = GenerationKind::chat;
  std::string system;
  std::vector<ChatMessage> messages;
  std::string prompt;
  int max_tokens = 800;
  double temperature = 0.8;
  std::optional<std::uint64_t> seed;
  Purpose purpose = Purpose::none;

  static GenerationRequest chat(std::string system, std::vector<ChatMessage> messages,
                                double temperature, Purpose purpose);
  static GenerationRequest image(std::string prompt, std::optional<std::uint64_t> seed);

  /// Throws ValidationError when kind-specific fields are missing or
  /// temperature is outside [0, 2].
  void validate() const;
};

struct SceneImageRef {
  std::string id;
  std::string path_or_url;  // relative to the data dir, e.g. "images/<id>.png"
  std::string prompt_used;
  Timestamp created_at{};

  bool operator==(const SceneImageRef&) const = default;
};

struct GenerationResult {
  GenerationKind kind = GenerationKind::chat;
  std::string text;       // chat
  std::string image_png;  // image: encoded bytes, stored by the caller
  std::optional<SceneImageRef> image;
  std::int64_t latency_ms = 0;
  std::string backend_id;
};

class Backend {
 public:
  virtual ~Backend() = default;
  /// Thread-safe. Throws BackendError once retries (if any) are exhausted.
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Solid-color 512x512 PNG whose color is a hash of the prompt.
class PlaceholderImages {
 public:
  static constexpr int kSize = 512;

  struct Rgb {
    std::uint8_t r, g, b;
  };
  static Rgb color_for(std::string_view prompt);

  std::string render(std::string_view prompt);

 private:
  std::mutex mu_;
  std::map<std::uint32_t, std::string> cache_;
};

/// Replays canned chat outputs in order. Image requests never consume the
/// script; they get placeholder PNGs.
class ScriptedBackend final : public Backend {
 public:
  /// `keywords` feed the non-strict fallback, drawn round-robin starting at
  /// an offset derived from `seed`.
  ScriptedBackend(std::vector<std::string> script, bool strict, std::uint64_t seed,
                  std::vector<std::string> keywords);

  GenerationResult generate(const GenerationRequest& request) override;
  std::string id() const override { return "scripted"; }

  std::size_t chat_calls() const;
  std::size_t remaining() const;

 private:
  std::string fallback(const GenerationRequest& request, std::size_t n) const;

  mutable std::mutex mu_;
  std::vector<std::string> script_;
  bool strict_;
  std::uint64_t seed_;
  std::vector<std::string> keywords_;
  std::size_t next_ = 0;
  std::size_t fallback_count_ = 0;
  PlaceholderImages images_;
};

/// Throws ValidationError for an empty script.
std::shared_ptr<ScriptedBackend> scripted_backend(std::vector<std::string> script, bool strict,
                                                  std::uint64_t seed,
                                                  std::vector<std::string> keywords = {});

/// Loads a JSON array of strings.
std::vector<std::string> load_script_file(const std::string& path);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::milliseconds deadline{60'000};
};

struct RemoteConfig {
  std::string chat_base_url;  // e.g. "https://api.example.com" or ".../v1"
  std::string chat_model;
  std::string api_key;
  std::string image_url;  // full endpoint URL; empty = placeholder images
  RetryPolicy retry;
};

/// OpenAI-compatible chat completions plus a `{"prompt","seed"}` -> PNG
/// image endpoint.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  GenerationResult generate(const GenerationRequest& request) override;
  std::string id() const override { return "remote"; }

  /// Total HTTP attempts issued since construction.
  std::size_t attempts() const { return attempts_.load(); }

 private:
  struct Reply {
    int status;
    std::string body;
  };
  Reply post_with_retry(const std::string& url, const std::string& body, bool want_json);

  RemoteConfig config_;
  std::atomic<std::size_t> attempts_{0};
  PlaceholderImages images_;
};

/// Split of a base URL into "scheme://host:port" and a path prefix.
struct UrlParts {
  std::string origin;
  std::string path;
};
UrlParts split_url(const std::string& url);

}  // namespace nights
