#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "protocol.hpp"

namespace proxilink::session {

// Wire-protocol client. A background thread owns the socket; received frames
// are queued until receive() picks them up.
class WireClient {
 public:
  WireClient();
  ~WireClient();
  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  // address is "host:port"; throws Io when the server is unreachable.
  void connect(const std::string& address);
  void send(const WireMessage& msg);
  void send_raw(std::string frame);
  // Empty on timeout, or once the connection is closed and drained.
  std::optional<WireMessage> receive(std::chrono::milliseconds timeout = std::chrono::seconds(5));
  bool connected() const;
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace proxilink::session
