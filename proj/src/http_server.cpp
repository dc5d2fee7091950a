#include "gos/http_server.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>

#include "httplib.h"
#include "gos/util.hpp"

namespace gos {

using nlohmann::json;

namespace {

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    send(res, {400, json{{"error", std::string("malformed JSON: ") + e.what()}}});
    return std::nullopt;
  }
}

std::string admin_token(const httplib::Request& req) {
  if (req.has_header("X-Admin-Token")) return req.get_header_value("X-Admin-Token");
  std::string auth = req.get_header_value("Authorization");
  constexpr std::string_view bearer = "Bearer ";
  if (auth.rfind(bearer, 0) == 0) return auth.substr(bearer.size());
  return {};
}

std::optional<long> int_param(const httplib::Request& req, const char* name, httplib::Response& res) {
  if (!req.has_param(name)) return 0;
  try {
    std::size_t used = 0;
    std::string text = req.get_param_value(name);
    long value = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    send(res, {400, json{{"error", std::string("invalid integer parameter '") + name + "'"}}});
    return std::nullopt;
  }
}

std::mutex log_mutex;

}  // namespace

HttpServer::HttpServer(SurveyService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;

  s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    if (log_level() > LogLevel::info) return;
    auto now = std::chrono::system_clock::now().time_since_epoch();
    json line = {{"ts_ms", std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
                 {"method", req.method},
                 {"path", req.path},
                 {"status", res.status},
                 {"remote", req.remote_addr}};
    std::lock_guard lock(log_mutex);
    std::cerr << line.dump() << '\n';
  });

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    log_warn("request failed: " + message);
    send(res, {500, json{{"error", message}}});
  });

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) { send(res, {200, json{{"status", "ok"}}}); });

  s.Post("/surveys", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse_body(req, res)) send(res, service_.create_survey(*body));
  });

  s.Get(R"(/surveys/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.survey_stats(req.matches[1]));
  });

  s.Post(R"(/surveys/([^/]+)/sessions)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.open_session(req.matches[1]));
  });

  s.Get(R"(/sessions/([^/]+)/menu)", [this](const httplib::Request& req, httplib::Response& res) {
    auto extend = int_param(req, "extend", res);
    if (extend) send(res, service_.session_menu(req.matches[1], static_cast<int>(*extend)));
  });

  s.Post(R"(/sessions/([^/]+)/response)", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse_body(req, res)) send(res, service_.submit_response(req.matches[1], *body));
  });

  s.Get(R"(/surveys/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
    Reply reply = service_.export_survey(req.matches[1]);
    if (reply.status == 200) res.set_header("Content-Disposition", "attachment; filename=\"survey.json\"");
    send(res, reply);
  });

  s.Post(R"(/surveys/([^/]+)/annotations)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.import_annotations(req.matches[1], admin_token(req), req.body));
  });

  s.Post(R"(/surveys/([^/]+)/cluster)", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse_body(req, res)) send(res, service_.start_cluster(req.matches[1], admin_token(req), *body));
  });

  s.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.job_status(req.matches[1]));
  });

  s.Get(R"(/surveys/([^/]+)/analysis/popularity)", [this](const httplib::Request& req, httplib::Response& res) {
    auto pad = int_param(req, "pad", res);
    if (!pad) return;
    if (*pad < 0) return send(res, {400, json{{"error", "pad must be >= 0"}}});
    send(res, service_.popularity(req.matches[1], static_cast<std::size_t>(*pad)));
  });

  s.Get(R"(/surveys/([^/]+)/analysis/palette)", [this](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::uint32_t> excluded;
    if (req.has_param("exclude")) {
      std::stringstream list(req.get_param_value("exclude"));
      std::string item;
      while (std::getline(list, item, ',')) {
        if (item.empty()) continue;
        try {
          excluded.push_back(static_cast<std::uint32_t>(std::stoul(item)));
        } catch (const std::exception&) {
          return send(res, {400, json{{"error", "exclude must be a comma-separated list of group indices"}}});
        }
      }
    }
    send(res, service_.palette(req.matches[1], excluded));
  });

  s.Get(R"(/surveys/([^/]+)/analysis/agreement)", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> a, b;
    if (req.has_param("a")) a = req.get_param_value("a");
    if (req.has_param("b")) b = req.get_param_value("b");
    send(res, service_.agreement(req.matches[1], a, b));
  });

  const auto& dir = service_.config().static_dir;
  if (!dir.empty()) {
    if (std::filesystem::is_directory(dir))
      s.set_mount_point("/", dir.string());
    else
      log_warn("static directory " + dir.string() + " does not exist; not serving assets");
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0)
    port_ = server_->bind_to_any_port(host);
  else
    port_ = server_->bind_to_port(host, port) ? port : -1;
  return port_;
}

bool HttpServer::listen() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_->is_running()) server_->stop();
}

}  // namespace gos
