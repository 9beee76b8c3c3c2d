#pragma once

#include <functional>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "prefelicit/session.hpp"

namespace prefelicit {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Routes one request against the manager without any networking:
///   POST /sessions                {table | csv (+dataset_config), horizon, config} -> 201 {id, status}
///   GET  /sessions                -> {sessions: [id...]}
///   GET  /sessions/{id}           -> state view
///   POST /sessions/{id}/answer    {preferred, other, idempotency_key} -> 202 state view
///   GET  /sessions/{id}/export    -> transcript
///   GET  /health
/// Alternatives in an answer may be given by index or by id. Errors come back
/// as {error, message, fields?} with 400, 404, 409 or 500.
ApiResponse handle_request(SessionManager& manager, const std::string& method, const std::string& path,
                           const std::string& body);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
};

using EnvLookup = std::function<const char*(const char*)>;

/// Reads PREFELICIT_BIND_ADDRESS ("host" or "host:port"), PREFELICIT_PORT,
/// PREFELICIT_CORS_ORIGIN, PREFELICIT_DATA_DIR, PREFELICIT_SERVER_SEED and
/// PREFELICIT_WORKERS over the given defaults.
void apply_environment(ServerOptions& server, SessionManagerOptions& manager,
                       const EnvLookup& getenv = [](const char* k) { return std::getenv(k); });

class HttpServer {
 public:
  HttpServer(SessionManager& manager, ServerOptions options);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket and returns the bound port. Throws on failure.
  int bind();
  /// Serves until stop(); call bind() first.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace prefelicit
