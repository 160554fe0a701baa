#include <atomic>
#include <csignal>
#include <pthread.h>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "nights/app.hpp"

namespace nights {

ApiError to_api_error(const std::exception& e) {
  const std::string msg = e.what();
  // Order matters: subclasses before their bases.
  if (dynamic_cast<const Busy*>(&e)) return {"busy", msg, true, 409};
  if (dynamic_cast<const IllegalTransition*>(&e)) return {"wrong_phase", msg, false, 409};
  if (dynamic_cast<const WrongPhase*>(&e)) return {"wrong_phase", msg, false, 409};
  if (dynamic_cast<const CapacityError*>(&e)) return {"wrong_phase", msg, false, 409};
  if (dynamic_cast<const AlreadyPlayed*>(&e)) return {"validation", msg, false, 409};
  if (dynamic_cast<const UnknownCard*>(&e)) return {"not_found", msg, false, 404};
  if (dynamic_cast<const NotFound*>(&e)) return {"not_found", msg, false, 404};
  if (dynamic_cast<const ValidationError*>(&e)) return {"validation", msg, false, 400};
  if (dynamic_cast<const ContractError*>(&e)) return {"contract_error", msg, true, 502};
  if (dynamic_cast<const BackendError*>(&e)) return {"backend_error", msg, true, 502};
  if (dynamic_cast<const StorageError*>(&e)) return {"backend_error", msg, false, 500};
  if (dynamic_cast<const json::exception*>(&e)) return {"validation", msg, false, 400};
  return {"backend_error", msg, false, 500};
}

void to_json(json& j, const ApiError& e) {
  j = {{"code", e.code}, {"message", e.message}, {"retryable", e.retryable}};
}

namespace {

std::optional<std::string> image_url(const std::optional<SceneImageRef>& ref) {
  if (!ref) return std::nullopt;
  return "/images/" + ref->id + ".png";
}

json url_or_null(const std::optional<SceneImageRef>& ref) {
  const auto u = image_url(ref);
  return u ? json(*u) : json(nullptr);
}

}  // namespace

json session_view(const GameSession& s) {
  json view = s;
  view["background_url"] = url_or_null(s.background);
  json cards = json::array();
  for (const auto& c : s.weapons) {
    json card = c;
    card["artwork_url"] = url_or_null(c.artwork);
    card["played"] = s.battle && std::any_of(s.battle->plays.begin(), s.battle->plays.end(),
                                             [&](const BattlePlay& p) { return p.card_id == c.id; });
    cards.push_back(std::move(card));
  }
  view["cards"] = std::move(cards);
  view["outcome"] = s.phase.is_closed() ? json(outcome_label(s)) : json(nullptr);
  return view;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, const std::exception& e) {
  const ApiError api = to_api_error(e);
  send_json(res, api.status, json(api));
}

json parse_body(const httplib::Request& req) {
  if (trim(req.body).empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw ValidationError("request body must be a JSON object");
  return body;
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const std::exception& e) {
      send_error(res, e);
    }
  };
}

}  // namespace

void install_routes(httplib::Server& server, std::shared_ptr<Engine> engine, ServiceOptions options) {
  const auto origins = options.cors_origins;
  server.set_post_routing_handler([origins](const httplib::Request& req, httplib::Response& res) {
    const std::string origin = req.get_header_value("Origin");
    if (origins.empty()) {
      res.set_header("Access-Control-Allow-Origin", "*");
    } else if (std::find(origins.begin(), origins.end(), origin) != origins.end()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Vary", "Origin");
    }
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/healthz", [engine](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"backend", engine->backend().id()}});
  });

  server.Post("/v1/sessions", guarded([engine](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    std::optional<std::uint64_t> seed;
    if (body.contains("seed") && !body["seed"].is_null()) {
      if (!body["seed"].is_number_unsigned()) {
        throw ValidationError("seed must be a non-negative integer");
      }
      seed = body["seed"].get<std::uint64_t>();
    }
    std::optional<json> persona;
    if (body.contains("persona")) persona = body["persona"];
    send_json(res, 201, session_view(engine->create_session(seed, persona)));
  }));

  server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+))",
             guarded([engine](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, session_view(engine->get(req.matches[1])));
             }));

  server.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/turns)",
              guarded([engine](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("text") || !body["text"].is_string()) {
                  throw ValidationError("body needs a \"text\" string");
                }
                const std::string id = req.matches[1];
                json out = engine->submit_turn(id, body["text"].get<std::string>());
                const GameSession s = engine->get(id);
                out["mood"] = s.mood;
                out["anger_count"] = s.anger_count;
                out["revision"] = s.revision;
                send_json(res, 200, out);
              }));

  server.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/battle/plays)",
              guarded([engine](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("card_id") || !body["card_id"].is_string()) {
                  throw ValidationError("body needs a \"card_id\" string");
                }
                const std::string id = req.matches[1];
                json out = engine->play_card(id, body["card_id"].get<std::string>());
                const GameSession s = engine->get(id);
                out["phase"] = to_string(s.phase);
                out["king_hp"] = s.battle ? s.battle->king_hp : BattleState::kKingHp;
                out["revision"] = s.revision;
                send_json(res, 200, out);
              }));

  server.Post(R"(/v1/sessions/([A-Za-z0-9_-]+)/close)",
              guarded([engine](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const std::string id = req.matches[1];
                const Storybook book = engine->close(id, body.value("abandon", false));
                const std::string base = "/v1/sessions/" + id + "/storybook";
                send_json(res, 200,
                          {{"session_id", id},
                           {"outcome", book.outcome},
                           {"storybook_json", base},
                           {"storybook_md", base + "?format=md"}});
              }));

  server.Get(R"(/v1/sessions/([A-Za-z0-9_-]+)/storybook)",
             guarded([engine](const httplib::Request& req, httplib::Response& res) {
               const bool md = req.get_param_value("format") == "md";
               const std::string text = engine->storybook_text(req.matches[1], md);
               res.status = 200;
               res.set_content(text, md ? "text/markdown; charset=utf-8" : "application/json");
             }));

  server.Get(R"(/images/([A-Za-z0-9_-]+)\.png)",
             guarded([engine](const httplib::Request& req, httplib::Response& res) {
               const auto png = engine->storage().load_image(req.matches[1]);
               if (!png) throw NotFound("no such image");
               res.status = 200;
               res.set_content(*png, "image/png");
             }));
}

int serve(const Config& config) {
  // Block termination signals before any thread starts so only the waiter
  // below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::shared_ptr<Engine> engine;
  try {
    engine = make_engine(config);
  } catch (const std::exception& e) {
    spdlog::error("startup failed: {}", e.what());
    return 1;
  }

  httplib::Server server;
  install_routes(server, engine, {config.cors_origins, config.data_dir});
  if (!server.bind_to_port("0.0.0.0", config.port)) {
    spdlog::error("cannot bind port {}", config.port);
    return 1;
  }

  std::atomic<bool> signalled{false};
  std::thread waiter([&server, &signalled, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    spdlog::info("signal {} received; finishing in-flight requests", sig);
    server.stop();
  });
  spdlog::info("listening on port {} (backend {})", config.port, engine->backend().id());
  const bool ok = server.listen_after_bind();
  if (!signalled) {
    // listen ended without a signal (e.g. socket error); wake the waiter.
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  return ok ? 0 : 1;
}

}  // namespace nights
