#include "protocol.hpp"

#include <array>
#include <utility>

namespace proxilink::session {

namespace {

constexpr std::array<std::pair<MessageType, const char*>, 11> kTypeNames{{
    {MessageType::Join, "join"},
    {MessageType::Joined, "joined"},
    {MessageType::PeerJoined, "peer-joined"},
    {MessageType::PeerLeft, "peer-left"},
    {MessageType::Signal, "signal"},
    {MessageType::LayoutSet, "layout-set"},
    {MessageType::LayoutRotate, "layout-rotate"},
    {MessageType::LayoutState, "layout-state"},
    {MessageType::VolumeUpdate, "volume-update"},
    {MessageType::GestureEvent, "gesture-event"},
    {MessageType::Error, "error"},
}};

std::string optional_string(const Json& doc, const char* key) {
  if (!doc.contains(key)) return {};
  if (!doc[key].is_string()) throw ProtocolFault(codes::kMalformed, std::string("field '") + key + "' must be a string");
  return doc[key].get<std::string>();
}

}  // namespace

const char* type_name(MessageType type) {
  for (const auto& [t, name] : kTypeNames)
    if (t == type) return name;
  return "error";
}

std::optional<MessageType> parse_type(std::string_view name) {
  for (const auto& [t, n] : kTypeNames)
    if (name == n) return t;
  return std::nullopt;
}

std::string WireMessage::encode() const {
  Json doc = Json::object();
  doc["v"] = v;
  doc["type"] = type_name(type);
  if (seq) doc["seq"] = *seq;
  if (!room.empty()) doc["room"] = room;
  if (!from.empty()) doc["from"] = from;
  if (!to.empty()) doc["to"] = to;
  doc["payload"] = payload;
  return doc.dump();
}

WireMessage decode(std::string_view frame) {
  Json doc;
  try {
    doc = Json::parse(frame);
  } catch (const Json::parse_error&) {
    throw ProtocolFault(codes::kMalformed, "frame is not valid JSON");
  }
  if (!doc.is_object()) throw ProtocolFault(codes::kMalformed, "frame must be a JSON object");
  if (!doc.contains("v") || !doc["v"].is_number_integer() || doc["v"].get<int>() != kProtocolVersion)
    throw ProtocolFault(codes::kBadVersion, "unsupported protocol version", true);
  if (!doc.contains("type") || !doc["type"].is_string())
    throw ProtocolFault(codes::kMalformed, "frame needs a string type");

  const auto type_text = doc["type"].get<std::string>();
  const auto type = parse_type(type_text);
  if (!type) throw ProtocolFault(codes::kUnknownType, "unknown message type '" + type_text + "'");

  WireMessage msg;
  msg.type = *type;
  if (doc.contains("seq")) {
    if (!doc["seq"].is_number_unsigned()) throw ProtocolFault(codes::kMalformed, "seq must be a non-negative integer");
    msg.seq = doc["seq"].get<std::uint64_t>();
  }
  msg.room = optional_string(doc, "room");
  msg.from = optional_string(doc, "from");
  msg.to = optional_string(doc, "to");
  msg.payload = doc.contains("payload") ? doc["payload"] : Json::object();
  return msg;
}

WireMessage make_error(const std::string& code, const std::string& message) {
  WireMessage msg;
  msg.type = MessageType::Error;
  msg.payload = Json{{"code", code}, {"message", message}};
  return msg;
}

}  // namespace proxilink::session
