#pragma once

#include <memory>
#include <string>

#include "gos/service.hpp"

namespace httplib {
class Server;
}

namespace gos {

/// JSON-over-HTTP front end for a SurveyService.
class HttpServer {
 public:
  explicit HttpServer(SurveyService& service);
  ~HttpServer();

  /// Binds to host:port; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a successful bind().
  bool listen();
  void stop();
  int port() const { return port_; }

 private:
  SurveyService& service_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = -1;
};

}  // namespace gos
