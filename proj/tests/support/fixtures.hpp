#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "nights/session.hpp"

namespace fixtures {

using nlohmann::json;

inline std::string continue_verdict(const std::string& continuation, int delta = 5,
                                    const std::string& comment = "Go on, then.") {
  return json{{"kind", "continue"}, {"comment", comment}, {"continuation", continuation}, {"mood_delta", delta}}.dump();
}

inline std::string rephrase_verdict(const std::string& comment = "Say it properly.", int delta = -5) {
  return json{{"kind", "rephrase"}, {"comment", comment}, {"mood_delta", delta}}.dump();
}

inline std::string angry_verdict(const std::string& comment = "Nonsense!", int delta = -15) {
  return json{{"kind", "angry"}, {"comment", comment}, {"mood_delta", delta}}.dump();
}

inline std::string card_json(const std::string& name, json power = 25) {
  return json{{"name", name},
              {"description", "Forged in the tale of " + name + "."},
              {"power", power},
              {"effect_description", name + " flashes."},
              {"player_line", "Taste " + name + "!"},
              {"king_line", "Not " + name + "!"}}
      .dump();
}

inline std::string ending_json(int actions = 4) {
  json a = json::array();
  for (int i = 0; i < actions; ++i) a.push_back("Action " + std::to_string(i + 1));
  return json{{"actions", a}, {"downfall", "The King fell."}, {"title", "Lamp of the East"},
              {"narration", "Sing, O bard."}}
      .dump();
}

/// Temp directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("nights-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// Local HTTP server on an ephemeral port, stopped on scope exit.
class StubServer {
 public:
  explicit StubServer(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  httplib::Server& server() { return server_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

inline nights::Timestamp fixed_time() { return nights::parse_iso8601("2025-01-01T00:00:00Z"); }

/// Engine over memory storage and a fixed clock.
struct MemoryRig {
  std::shared_ptr<nights::ScriptedBackend> backend;
  std::shared_ptr<nights::MemoryStorage> storage = std::make_shared<nights::MemoryStorage>();
  std::shared_ptr<nights::FixedClock> clock = std::make_shared<nights::FixedClock>(fixed_time());
  std::unique_ptr<nights::Engine> engine;

  explicit MemoryRig(std::vector<std::string> script, bool strict = true, std::uint64_t seed = 42,
                     nights::EngineOptions options = {})
      : backend(nights::scripted_backend(std::move(script), strict, seed)),
        engine(std::make_unique<nights::Engine>(backend, storage, clock, std::move(options))) {}
};

}  // namespace fixtures
