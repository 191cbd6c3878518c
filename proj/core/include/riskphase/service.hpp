#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "riskphase/run_store.hpp"

namespace riskphase {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON unless a text format was requested
  std::string content_type = "application/json";
};

/// JSON-over-HTTP front end of a run store. Routing lives in handle() so it
/// can be exercised without a socket; serve() binds it to httplib.
class Service {
 public:
  /// Relative input paths in POSTed configs resolve against `config_base`.
  Service(std::filesystem::path runs_root, std::filesystem::path config_base);

  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body);

  /// Blocks until stop() is called from another thread. Returns false when the bind fails.
  bool serve(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  /// Serves on a port obtained from bind_any().
  bool listen_after_bind();
  void stop();

  RunStore& store() { return store_; }

 private:
  struct Impl;
  RunStore store_;
  std::filesystem::path config_base_;
  std::shared_ptr<Impl> impl_;
};

}  // namespace riskphase
