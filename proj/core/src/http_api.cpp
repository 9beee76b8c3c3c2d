#include "prefelicit/http_api.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <httplib.h>

#include "prefelicit/io.hpp"

namespace prefelicit {

using nlohmann::json;

namespace {

ApiResponse error(int status, std::string code, std::string message, json fields = nullptr) {
  json body{{"error", std::move(code)}, {"message", std::move(message)}};
  if (!fields.is_null()) body["fields"] = std::move(fields);
  return {status, std::move(body)};
}

ApiResponse validation_error(const ValidationError& e) {
  json fields = json::array();
  for (const auto& f : e.errors()) fields.push_back({{"field", f.field}, {"message", f.message}});
  return error(400, "validation", e.what(), std::move(fields));
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path.substr(0, path.find('?')));
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

PerformanceTable table_from_request(const json& body) {
  if (body.contains("table")) return table_from_json(body.at("table"));
  if (body.contains("csv")) {
    if (!body.at("csv").is_string()) throw ValidationError("csv", "must be a string");
    std::istringstream in(body.at("csv").get<std::string>());
    const RawTable raw = read_performance_csv(in);
    DatasetConfig config;
    if (body.contains("dataset_config")) config = DatasetConfig::from_json(body.at("dataset_config"));
    return build_table(raw, config);
  }
  throw ValidationError("table", "either 'table' or 'csv' is required");
}

int alternative_index(const json& v, const PerformanceTable& table, const char* field) {
  if (v.is_number_integer()) {
    const int i = v.get<int>();
    if (i < 0 || i >= table.size()) throw ValidationError(field, "index out of range");
    return i;
  }
  if (v.is_string()) {
    if (const auto i = table.index_of(v.get<std::string>())) return *i;
    throw ValidationError(field, "unknown alternative '" + v.get<std::string>() + "'");
  }
  throw ValidationError(field, "must be an alternative index or id");
}

ApiResponse create_session(SessionManager& manager, const json& body) {
  std::vector<FieldError> errors;
  if (!body.contains("horizon") || !body.at("horizon").is_number_integer()) {
    errors.push_back({"horizon", "required integer"});
  }
  std::optional<PerformanceTable> table;
  std::optional<SessionConfig> config;
  try {
    table = table_from_request(body);
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.errors().begin(), e.errors().end());
  } catch (const std::invalid_argument& e) {
    errors.push_back({"table", e.what()});
  }
  try {
    config = SessionConfig::from_json(body.value("config", json(nullptr)));
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.errors().begin(), e.errors().end());
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  const std::string id = manager.create(*table, body.at("horizon").get<int>(), *config);
  return {201, {{"id", id}, {"status", to_string(manager.state(id)->status)}}};
}

ApiResponse submit(SessionManager& manager, const std::string& id, const json& body) {
  const auto state = manager.state(id);
  std::vector<FieldError> errors;
  int preferred = -1;
  int other = -1;
  for (const char* key : {"preferred", "other"}) {
    try {
      if (!body.contains(key)) throw ValidationError(key, "required");
      (std::string(key) == "preferred" ? preferred : other) = alternative_index(body.at(key), *state->table, key);
    } catch (const ValidationError& e) {
      errors.insert(errors.end(), e.errors().begin(), e.errors().end());
    }
  }
  std::string key;
  if (body.contains("idempotency_key")) {
    if (!body.at("idempotency_key").is_string()) {
      errors.push_back({"idempotency_key", "must be a string"});
    } else {
      key = body.at("idempotency_key").get<std::string>();
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  const auto next = manager.submit_answer(id, preferred, other, key);
  const bool busy = next->status == SessionStatus::fitting || next->status == SessionStatus::selecting;
  return {busy ? 202 : 200, session_view(*next)};
}

}  // namespace

ApiResponse handle_request(SessionManager& manager, const std::string& method, const std::string& path,
                           const std::string& body) {
  try {
    const auto parts = split_path(path);
    json payload;
    if (method == "POST") {
      try {
        payload = body.empty() ? json::object() : json::parse(body);
      } catch (const json::parse_error& e) {
        return error(400, "bad_request", std::string("malformed JSON: ") + e.what());
      }
      if (!payload.is_object()) return error(400, "bad_request", "body must be a JSON object");
    }
    if (parts.size() == 1 && parts[0] == "health" && method == "GET") return {200, {{"status", "ok"}}};
    if (parts.empty() || parts[0] != "sessions") return error(404, "not_found", "no route for " + path);
    if (parts.size() == 1) {
      if (method == "POST") return create_session(manager, payload);
      if (method == "GET") return {200, {{"sessions", manager.ids()}}};
    } else if (parts.size() == 2 && method == "GET") {
      return {200, session_view(*manager.state(parts[1]))};
    } else if (parts.size() == 3 && parts[2] == "answer" && method == "POST") {
      return submit(manager, parts[1], payload);
    } else if (parts.size() == 3 && parts[2] == "export" && method == "GET") {
      return {200, session_export(*manager.state(parts[1]))};
    } else {
      return error(404, "not_found", "no route for " + path);
    }
    return error(405, "method_not_allowed", method + " is not supported on " + path);
  } catch (const ValidationError& e) {
    return validation_error(e);
  } catch (const NotFoundError& e) {
    return error(404, "not_found", e.what());
  } catch (const ConflictError& e) {
    return error(409, "conflict", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

void apply_environment(ServerOptions& server, SessionManagerOptions& manager, const EnvLookup& getenv) {
  auto integer = [](const char* name, const char* text) {
    std::uint64_t v = 0;
    const char* end = text + std::char_traits<char>::length(text);
    const auto [ptr, ec] = std::from_chars(text, end, v);
    if (ec != std::errc() || ptr != end) {
      throw std::invalid_argument(std::string(name) + " must be a non-negative integer");
    }
    return v;
  };
  if (const char* v = getenv("PREFELICIT_BIND_ADDRESS")) {
    // "host", "host:port", "[v6]" or "[v6]:port"; a bare IPv6 address has no port.
    const std::string addr = v;
    std::string port;
    if (!addr.empty() && addr.front() == '[') {
      const auto close = addr.find(']');
      server.host = addr.substr(1, close == std::string::npos ? std::string::npos : close - 1);
      if (close != std::string::npos && close + 1 < addr.size() && addr[close + 1] == ':') {
        port = addr.substr(close + 2);
      }
    } else if (std::count(addr.begin(), addr.end(), ':') == 1) {
      server.host = addr.substr(0, addr.find(':'));
      port = addr.substr(addr.find(':') + 1);
    } else {
      server.host = addr;
    }
    if (!port.empty()) server.port = static_cast<int>(integer("PREFELICIT_BIND_ADDRESS", port.c_str()));
  }
  if (const char* v = getenv("PREFELICIT_PORT")) server.port = static_cast<int>(integer("PREFELICIT_PORT", v));
  if (const char* v = getenv("PREFELICIT_CORS_ORIGIN")) server.cors_origin = v;
  if (const char* v = getenv("PREFELICIT_DATA_DIR")) manager.data_dir = v;
  if (const char* v = getenv("PREFELICIT_SERVER_SEED")) manager.server_seed = integer("PREFELICIT_SERVER_SEED", v);
  if (const char* v = getenv("PREFELICIT_WORKERS")) {
    manager.workers = static_cast<int>(integer("PREFELICIT_WORKERS", v));
  }
}

struct HttpServer::Impl {
  Impl(SessionManager& m, ServerOptions o) : manager(m), options(std::move(o)) {}
  SessionManager& manager;
  ServerOptions options;
  httplib::Server server;
};

HttpServer::HttpServer(SessionManager& manager, ServerOptions options)
    : impl_(std::make_unique<Impl>(manager, std::move(options))) {
  auto& svr = impl_->server;
  svr.set_default_headers({{"Access-Control-Allow-Origin", impl_->options.cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Vary", "Origin"}});
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse out = handle_request(impl_->manager, req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  svr.Get(R"(/.*)", forward);
  svr.Post(R"(/.*)", forward);
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->server.bind_to_any_port(o.host);
    if (port < 0) throw std::runtime_error("cannot bind " + o.host);
    o.port = port;
  } else if (!impl_->server.bind_to_port(o.host, o.port)) {
    throw std::runtime_error("cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  return o.port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace prefelicit
