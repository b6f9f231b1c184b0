#pragma once

// HTTP front end for SessionManager.
//
//   POST /sessions                 create; 201 with the session JSON
//   GET  /sessions/{id}            status; 200
//   POST /sessions/{id}/answers    {"token": "...", "ranking": [ids...]}; 200
//
// Errors carry {"error": <reason>, "message": <text>} with reasons
// malformed-scenario / invalid-request / invalid-ranking (400), not-found
// (404), stale-token / session-finished (409).

#include <memory>
#include <string>

#include "prefelicit/session.hpp"

namespace httplib {
class Server;
}

namespace prefelicit {

class HttpService {
 public:
  explicit HttpService(SessionManager& sessions);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Call bind first.
  void listen();
  void stop();

 private:
  SessionManager& sessions_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace prefelicit
