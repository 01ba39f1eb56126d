#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace proxilink::session {

using Json = nlohmann::ordered_json;

inline constexpr int kProtocolVersion = 1;

enum class MessageType {
  Join,
  Joined,
  PeerJoined,
  PeerLeft,
  Signal,
  LayoutSet,
  LayoutRotate,
  LayoutState,
  VolumeUpdate,
  GestureEvent,
  Error,
};

const char* type_name(MessageType type);
std::optional<MessageType> parse_type(std::string_view name);

// One protocol frame. Encoded field order is fixed: v, type, seq, room, from,
// to, payload; absent optional fields are omitted.
struct WireMessage {
  int v = kProtocolVersion;
  MessageType type = MessageType::Error;
  std::optional<std::uint64_t> seq;
  std::string room;
  std::string from;
  std::string to;
  Json payload = Json::object();

  std::string encode() const;
};

// Error codes carried in `error` payloads.
namespace codes {
inline constexpr const char* kMalformed = "malformed";
inline constexpr const char* kBadVersion = "bad-version";
inline constexpr const char* kUnknownType = "unknown-type";
inline constexpr const char* kBadRequest = "bad-request";
inline constexpr const char* kNotJoined = "not-joined";
inline constexpr const char* kAlreadyJoined = "already-joined";
inline constexpr const char* kDuplicateId = "duplicate-id";
inline constexpr const char* kRoomFull = "room-full";
inline constexpr const char* kNoSuchPeer = "no-such-peer";
inline constexpr const char* kNotFound = "not-found";
}  // namespace codes

// Raised while decoding or handling a client frame. `close` asks the
// transport to drop the connection after the error reply.
class ProtocolFault : public std::runtime_error {
 public:
  ProtocolFault(std::string code, const std::string& message, bool close = false)
      : std::runtime_error(message), code_(std::move(code)), close_(close) {}

  const std::string& code() const noexcept { return code_; }
  bool close() const noexcept { return close_; }

 private:
  std::string code_;
  bool close_;
};

WireMessage decode(std::string_view frame);

WireMessage make_error(const std::string& code, const std::string& message);

}  // namespace proxilink::session
