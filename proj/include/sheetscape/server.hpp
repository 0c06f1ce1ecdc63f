#pragma once

#include "sheetscape/service.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <string>

namespace sheetscape {

/// Session options given as text fields (multipart parts or query
/// parameters): sheet, delimiter, range, mode, normalize, signed, hmax,
/// pitch. Throws std::invalid_argument naming the bad field.
SessionSpec session_spec_from_fields(const std::map<std::string, std::string>& fields);

/// Detector options from text fields: z, axis, window, tab-run.
DetectorParams detector_params_from_fields(const std::map<std::string, std::string>& fields);

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::size_t threads = 2;
  std::size_t body_limit = std::size_t{512} << 20;
  bool handle_signals = false;  // stop on SIGINT / SIGTERM
};

/// HTTP + WebSocket front end over a SessionManager. See docs/protocol.md.
class Server {
 public:
  Server(SessionManager& sessions, ServerOptions options = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the worker threads; returns the bound port.
  unsigned short start();

  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sheetscape
