#pragma once

#include <memory>
#include <string>

#include "config.hpp"
#include "hub.hpp"

namespace proxilink::session {

// WebSocket + HTTP front end for a SessionHub.
//
//   ws://host:port/<any path>   wire protocol, one JSON text frame per message
//   GET  /profile               current calibration profile (canonical JSON)
//   PUT  /profile               validate, persist and adopt a new profile;
//                               422 with per-slot issues when invalid
//
// All network handlers run on a single I/O thread.
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the listening socket; throws Io when the address is unavailable.
  void listen();
  // "host:port" with the port actually bound.
  std::string address() const;
  // Serves until stop() is called.
  void run();
  // Safe to call from any thread.
  void stop();

  SessionHub& hub();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace proxilink::session
