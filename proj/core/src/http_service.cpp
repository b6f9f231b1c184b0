#include "prefelicit/http_service.hpp"

#include <httplib.h>
#include <json.hpp>

namespace prefelicit {

namespace {

using nlohmann::json;

void sendError(httplib::Response& res, int status, const std::string& reason,
               const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", reason}, {"message", message}}.dump(), "application/json");
}

// Runs `body`, translating library errors into status codes and reasons.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const MalformedScenarioError& e) {
    sendError(res, 400, "malformed-scenario", e.what());
  } catch (const ParseError& e) {
    sendError(res, 400, "invalid-request", e.what());
  } catch (const ConfigError& e) {
    sendError(res, 400, "invalid-request", e.what());
  } catch (const CostModelError& e) {
    sendError(res, 400, "invalid-request", e.what());
  } catch (const InvalidScenarioError& e) {
    sendError(res, 400, "malformed-scenario", e.what());
  } catch (const DomainError& e) {
    sendError(res, 400, "invalid-ranking", e.what());
  } catch (const NotFoundError& e) {
    sendError(res, 404, "not-found", e.what());
  } catch (const ConflictError& e) {
    const std::string what = e.what();
    sendError(res, 409, what.find("finished") != std::string::npos ? "session-finished" : "stale-token",
              what);
  } catch (const std::exception& e) {
    sendError(res, 500, "internal", e.what());
  }
}

}  // namespace

HttpService::HttpService(SessionManager& sessions)
    : sessions_(sessions), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const SessionSnapshot snap = sessions_.create(parseCreateRequest(req.body));
      res.status = 201;
      res.set_content(sessions_.statusJson(snap.id), "application/json");
    });
  });

  server_->Get(R"(/sessions/([0-9a-zA-Z_-]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   res.set_content(sessions_.statusJson(req.matches[1]), "application/json");
                 });
               });

  server_->Post(R"(/sessions/([0-9a-zA-Z_-]+)/answers)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const std::string id = req.matches[1];
                    json body;
                    try {
                      body = json::parse(req.body);
                    } catch (const json::exception& e) {
                      throw ParseError(std::string("answer is not valid JSON: ") + e.what());
                    }
                    if (!body.is_object() || !body.contains("token") ||
                        !body["token"].is_string()) {
                      throw ParseError("answer needs a string 'token'");
                    }
                    if (!body.contains("ranking") || !body["ranking"].is_array()) {
                      throw DomainError("answer needs a 'ranking' array of ids");
                    }
                    std::vector<int> ranking;
                    for (const json& v : body["ranking"]) {
                      if (!v.is_number_integer()) throw DomainError("ranking entries must be ids");
                      ranking.push_back(v.get<int>());
                    }
                    sessions_.submit(id, body["token"].get<std::string>(), ranking);
                    res.set_content(sessions_.statusJson(id), "application/json");
                  });
                });
}

HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port)) {
    throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpService::listen() { server_->listen_after_bind(); }

void HttpService::stop() { server_->stop(); }

}  // namespace prefelicit
