#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>

#include <httplib.h>

#include "giraf/error.hpp"
#include "giraf/io.hpp"
#include "giraf/planner.hpp"
#include "giraf/referent.hpp"

namespace giraf {

inline constexpr int kBackendTimeoutSeconds = 30;

namespace detail {

struct SplitUrl {
  std::string base;  // scheme://host[:port], what httplib::Client wants
  std::string path;  // leading-slash request path, "/" if absent
};

inline SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("backend URL must look like http://host:port[/path], "
                      "got '" + url + "'");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return SplitUrl{url, "/"};
  return SplitUrl{url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

// Talks the minimal completion protocol: POST the prompt as structured text,
// read back {"text": ...}. Deterministic backends should ignore nothing:
// temperature is always 0 here.
class RemoteBackend final : public CompletionBackend {
 public:
  explicit RemoteBackend(const std::string& url) : url_(url) {
    auto split = detail::split_url(url);
    base_ = split.base;
    path_ = split.path;
  }

  // Reads GIRAF_BACKEND_URL.
  static RemoteBackend from_env() {
    const char* url = std::getenv("GIRAF_BACKEND_URL");
    if (!url || !*url)
      throw ConfigError("GIRAF_BACKEND_URL is not set; required for the "
                        "remote backend");
    return RemoteBackend(url);
  }

  // Shrinks the wait for tests; production keeps the 30 s default.
  void set_timeout_seconds(int seconds) { timeout_seconds_ = seconds; }

  std::string complete(const Prompt& prompt) override {
    Json body{{"prompt", prompt.text()},
              {"temperature", prompt.temperature},
              {"max_tokens", prompt.max_tokens},
              {"stop", prompt.stop}};

    httplib::Client client(base_);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_write_timeout(timeout_seconds_, 0);

    auto started = std::chrono::steady_clock::now();
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
      auto err = res.error();
      std::string what = url_ + ": " + httplib::to_string(err);
      // Read/Write failures cover both expired deadlines and dropped
      // connections; only the former eats the whole budget.
      std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - started;
      if (err == httplib::Error::ConnectionTimeout ||
          ((err == httplib::Error::Read || err == httplib::Error::Write) &&
           elapsed.count() >= timeout_seconds_ - 0.5))
        throw BackendTimeoutError(what);
      throw BackendUnreachableError(what);
    }
    if (res->status != 200)
      throw BackendUnreachableError(url_ + ": status " +
                                    std::to_string(res->status));
    Json reply;
    try {
      reply = Json::parse(res->body);
    } catch (const Json::exception&) {
      throw BackendUnreachableError(url_ + ": response is not valid "
                                    "structured text");
    }
    if (!reply.is_object() || !reply.contains("text") ||
        !reply["text"].is_string())
      throw BackendUnreachableError(url_ + ": response lacks a 'text' field");
    return reply["text"].get<std::string>();
  }

  std::string name() const override { return "remote"; }

 private:
  std::string url_, base_, path_;
  int timeout_seconds_ = kBackendTimeoutSeconds;
};

// ---------------------------------------------------------------------------
// Grounding service: stateless /v1/resolve and /v1/plan over the same file
// formats the CLI uses. Handlers are plain functions over request bodies so
// tests can call them without sockets.

class GroundingService {
 public:
  struct Config {
    std::optional<Scene> scene;            // default scene for requests
    std::optional<Ontology> ontology;      // default: prefixes of the scene
    std::filesystem::path fixture_dir;     // base for "scene_ref" lookups
    std::string backend = "rule";          // "rule" | "replay"
    std::filesystem::path transcript_dir;  // for backend = "replay"
  };

  explicit GroundingService(Config cfg) : cfg_(std::move(cfg)) {
    if (cfg_.backend != "rule" && cfg_.backend != "replay")
      throw ConfigError("service backend must be rule or replay, got '" +
                        cfg_.backend + "'");
  }

  // (status, body) for one /v1/resolve request.
  std::pair<int, Json> handle_resolve(const Json& body) const {
    try {
      Scene scene = request_scene(body);
      HandKeypoints hand =
          frame_from_json(detail::need(body, "hand", ""), "hand");
      std::string mode = detail::need_string(body, "mode", "");
      if (mode == "object") {
        std::string target = detail::need_string(body, "target", "");
        Ontology onto = request_ontology(body, scene);
        ObjectEntry hit = resolve_object(scene, hand, target, onto);
        return {200, Json{{"kind", "object"},
                          {"label", hit.label},
                          {"pos", detail::vec3_json(hit.position)}}};
      }
      if (mode == "location") {
        Vec3 p = resolve_location(scene, hand);
        return {200,
                Json{{"kind", "location"}, {"pos", detail::vec3_json(p)}}};
      }
      if (mode == "direction") {
        Vec3 d = resolve_direction(hand);
        return {200,
                Json{{"kind", "direction"}, {"dir", detail::vec3_json(d)}}};
      }
      throw InvariantViolationError(
          "mode", "expected object, location or direction, got '" + mode +
                      "'");
    } catch (const Error& e) {
      return error_response(e);
    }
  }

  // (status, body) for one /v1/plan request.
  std::pair<int, Json> handle_plan(const Json& body) const {
    try {
      Instruction ins;
      ins.speech_text = detail::need_string(body, "speech", "");
      if (auto it = body.find("gesture"); it != body.end() && !it->is_null()) {
        if (it->is_string()) {
          auto cls = parse_gesture(it->get<std::string>());
          if (!cls)
            throw InvariantViolationError(
                "gesture", "unknown gesture '" + it->get<std::string>() + "'");
          ins.gesture = GestureRepresentation::label(*cls);
        } else if (it->is_object() && it->contains("description")) {
          ins.gesture = GestureRepresentation::description(
              detail::need_string(*it, "description", "gesture"));
        } else {
          throw InvariantViolationError(
              "gesture", "expected a gesture name or {description: ...}");
        }
      }
      if (body.contains("index"))
        ins.index = detail::need_int(body, "index", "");

      PromptContext ctx = default_prompt_context();
      PlanResult plan;
      if (cfg_.backend == "replay") {
        ReplayBackend backend(cfg_.transcript_dir);
        plan = plan_instruction(ctx, ins, backend);
      } else {
        RulePlanner backend;
        plan = plan_instruction(ctx, ins, backend);
      }

      Json violations = Json::array();
      for (const auto& v : plan.violations)
        violations.push_back(Json{{"kind", violation_kind_name(v.kind)},
                                  {"line", v.line},
                                  {"message", v.message}});
      return {200, Json{{"program", pretty_print(plan.program)},
                        {"valid", plan.ok()},
                        {"violations", std::move(violations)},
                        {"digest", plan.digest}}};
    } catch (const Error& e) {
      return error_response(e);
    }
  }

  // Registers both routes on an httplib server.
  void attach(httplib::Server& server) const {
    auto route = [this](auto handler) {
      return [this, handler](const httplib::Request& req,
                             httplib::Response& res) {
        Json body;
        try {
          body = Json::parse(req.body);
        } catch (const Json::exception& e) {
          FileParseError err(std::string("request body: ") + e.what());
          auto [status, reply] = error_response(err);
          res.status = status;
          res.set_content(reply.dump(), "application/json");
          return;
        }
        auto [status, reply] = (this->*handler)(body);
        res.status = status;
        res.set_content(reply.dump(), "application/json");
      };
    };
    server.Post("/v1/resolve", route(&GroundingService::handle_resolve));
    server.Post("/v1/plan", route(&GroundingService::handle_plan));
  }

  // Blocking listen on a fixed port.
  bool listen(const std::string& host, int port) {
    httplib::Server server;
    attach(server);
    return server.listen(host, port);
  }

 private:
  static std::pair<int, Json> error_response(const Error& e) {
    return {400, Json{{"error", Json{{"code", e.code()},
                                     {"message", e.what()}}}}};
  }

  Scene request_scene(const Json& body) const {
    if (auto it = body.find("scene"); it != body.end())
      return scene_from_json(*it);
    if (auto it = body.find("scene_ref"); it != body.end()) {
      if (!it->is_string())
        throw InvariantViolationError("scene_ref", "expected a file name");
      std::filesystem::path ref = it->get<std::string>();
      if (ref.is_relative() && !cfg_.fixture_dir.empty())
        ref = cfg_.fixture_dir / ref;
      return load_scene(ref);
    }
    if (cfg_.scene) return *cfg_.scene;
    throw InvariantViolationError("scene",
                                  "request carries neither scene nor "
                                  "scene_ref and the service has no default");
  }

  Ontology request_ontology(const Json& body, const Scene& scene) const {
    if (auto it = body.find("ontology"); it != body.end()) {
      Json wrapped{{"format_version", 1}, {"categories", *it}};
      return ontology_from_json(wrapped);
    }
    if (cfg_.ontology) return *cfg_.ontology;
    return Ontology::from_prefixes(scene_vocabulary(scene));
  }

  Config cfg_;
};

}  // namespace giraf
