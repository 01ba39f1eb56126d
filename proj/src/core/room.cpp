#include "room.hpp"

#include <algorithm>
#include <cstdio>

#include "error.hpp"

namespace proxilink::session {

const char* role_name(Role role) {
  switch (role) {
    case Role::Peer: return "peer";
    case Role::Viewer: return "viewer";
    case Role::Sensor: return "sensor";
  }
  return "peer";
}

Role parse_role(const std::string& text) {
  if (text == "peer") return Role::Peer;
  if (text == "viewer") return Role::Viewer;
  if (text == "sensor") return Role::Sensor;
  throw ProtocolFault(codes::kBadRequest, "unknown role '" + text + "'");
}

Room::Room(std::string id, RoomSettings settings) : id_(std::move(id)), settings_(std::move(settings)) {
  settings_.policy.validate();
  if (settings_.policy.mode == layout::GainMode::RankTable &&
      settings_.slots.size() > settings_.policy.rank_table.size())
    throw Error(ErrorCode::Configuration, "rank_table is shorter than the slot list");
}

layout::GainMap Room::gains() const {
  auto gains = layout::gains_for_layout(layout_, settings_.slots, settings_.policy);
  for (const auto& queued : queue_) gains[queued] = 0.0;
  return gains;
}

Json Room::layout_payload(const Json& cause) const {
  Json assignment = Json::object();
  for (const auto& [participant, slot] : layout_.assignment) assignment[participant] = slot;
  Json slot_order = Json::array();
  for (const auto& slot : settings_.slots.slots()) slot_order.push_back(slot.id);
  Json gain_map = Json::object();
  for (const auto& [participant, gain] : gains()) gain_map[participant] = gain;
  Json queue = Json::array();
  for (const auto& q : queue_) queue.push_back(q);
  return Json{{"version", layout_.version}, {"assignment", std::move(assignment)},
              {"slot_order", std::move(slot_order)}, {"gains", std::move(gain_map)},
              {"queue", std::move(queue)}, {"cause", cause}};
}

Json Room::snapshot(const std::string& you) const {
  Json members = Json::array();
  for (const auto& id : order_) {
    const auto& m = members_.at(id);
    members.push_back({{"id", m.id}, {"name", m.name}, {"role", role_name(m.role)}});
  }
  Json slots = Json::array();
  for (const auto& slot : settings_.slots.slots())
    slots.push_back({{"id", slot.id}, {"label", slot.label}, {"distance_m", slot.distance_m}});
  return Json{{"you", you},
              {"members", std::move(members)},
              {"slots", std::move(slots)},
              {"policy", policy_to_json(settings_.policy)},
              {"layout", layout_payload(Json{{"op", "snapshot"}})}};
}

std::uint64_t Room::state_hash() const { return session::state_hash(layout_, queue_, gains()); }

void Room::check_invariants() const {
  layout::check_invariants(layout_, settings_.slots);
  for (const auto& [participant, slot] : layout_.assignment) {
    auto it = members_.find(participant);
    if (it == members_.end() || it->second.role != Role::Peer)
      throw Error(ErrorCode::Validation, "slot holder '" + participant + "' is not a peer member");
  }
  for (const auto& q : queue_) {
    if (!members_.contains(q) || layout_.assignment.contains(q))
      throw Error(ErrorCode::Validation, "queued participant '" + q + "' is inconsistent");
  }
  std::size_t peers = 0;
  for (const auto& [id, m] : members_) peers += m.role == Role::Peer;
  if (peers != layout_.assignment.size() + queue_.size())
    throw Error(ErrorCode::Validation, "peer is neither seated nor queued");
  if (!queue_.empty() && layout::nearest_free_slot(layout_, settings_.slots))
    throw Error(ErrorCode::Validation, "free slot left while peers are queued");
}

WireMessage Room::broadcast_message(MessageType type, Json payload) {
  WireMessage msg;
  msg.type = type;
  msg.seq = ++seq_;
  msg.room = id_;
  msg.payload = std::move(payload);
  return msg;
}

std::vector<std::string> Room::everyone_except(const std::string& participant) const {
  std::vector<std::string> out;
  for (const auto& id : order_)
    if (id != participant) out.push_back(id);
  return out;
}

void Room::emit_layout(Outcome& out, Json cause) {
  auto msg = broadcast_message(MessageType::LayoutState, layout_payload(cause));
  out.log.push_back({"layout-state", msg.payload});
  out.deliveries.push_back({order_, std::move(msg)});
}

Outcome Room::join(const std::string& participant, const std::string& name, Role role) {
  if (participant.empty()) throw ProtocolFault(codes::kBadRequest, "join needs a participant id in 'from'");
  if (members_.contains(participant))
    throw ProtocolFault(codes::kDuplicateId, "participant '" + participant + "' is already in the room");
  if (members_.size() >= settings_.member_cap) throw ProtocolFault(codes::kRoomFull, "room '" + id_ + "' is full");

  members_[participant] = Member{participant, name, role};
  order_.push_back(participant);
  if (role == Role::Peer) {
    if (auto slot = layout::nearest_free_slot(layout_, settings_.slots))
      layout_ = layout::place(layout_, settings_.slots, participant, *slot);
    else
      queue_.push_back(participant);
  }

  Outcome out;
  const Json member{{"id", participant}, {"name", name}, {"role", role_name(role)}};
  out.log.push_back({"join", member});

  auto joined = broadcast_message(MessageType::Joined, snapshot(participant));
  WireMessage peer_joined = joined;
  peer_joined.type = MessageType::PeerJoined;
  peer_joined.payload = member;
  out.deliveries.push_back({{participant}, std::move(joined)});
  out.deliveries.push_back({everyone_except(participant), std::move(peer_joined)});

  if (role == Role::Peer) emit_layout(out, Json{{"op", "join"}, {"participant", participant}});
  return out;
}

Outcome Room::leave(const std::string& participant) {
  auto it = members_.find(participant);
  if (it == members_.end()) return {};
  const Role role = it->second.role;
  members_.erase(it);
  order_.erase(std::find(order_.begin(), order_.end(), participant));

  Json cause{{"op", "leave"}, {"participant", participant}};
  if (role == Role::Peer) {
    if (auto seat = layout_.assignment.find(participant); seat != layout_.assignment.end()) {
      layout::LayoutState next{layout_.assignment, layout_.version + 1};
      const auto freed = seat->second;
      next.assignment.erase(participant);
      if (!queue_.empty()) {
        next.assignment[queue_.front()] = freed;
        cause["granted"] = queue_.front();
        queue_.pop_front();
      }
      layout_ = std::move(next);
    } else {
      queue_.erase(std::find(queue_.begin(), queue_.end(), participant));
    }
  }

  Outcome out;
  out.log.push_back({"leave", Json{{"id", participant}}});
  out.deliveries.push_back({order_, broadcast_message(MessageType::PeerLeft, Json{{"id", participant}})});
  if (role == Role::Peer) emit_layout(out, std::move(cause));
  return out;
}

Outcome Room::rotate(layout::Direction direction, const std::string& source) {
  auto result = layout::rotate_layout(layout_, settings_.slots, direction);
  if (result.noop) return {};
  layout_ = std::move(result.layout);
  Outcome out;
  emit_layout(out, Json{{"op", "rotate"}, {"direction", layout::direction_name(direction)}, {"source", source}});
  return out;
}

Outcome Room::set(const std::string& participant, const std::string& slot) {
  if (!members_.contains(participant) || members_.at(participant).role != Role::Peer)
    throw ProtocolFault(codes::kNotFound, "no peer '" + participant + "' in room");
  if (!settings_.slots.contains(slot)) throw ProtocolFault(codes::kNotFound, "no slot '" + slot + "' in room");

  if (auto seat = layout_.assignment.find(participant); seat != layout_.assignment.end()) {
    if (seat->second == slot) return {};
    layout_ = layout::set_assignment(layout_, settings_.slots, participant, slot);
  } else {
    // A queued peer takes the slot; its occupant, if any, takes the queue spot.
    auto pos = std::find(queue_.begin(), queue_.end(), participant);
    layout::LayoutState next{layout_.assignment, layout_.version + 1};
    auto occupant = std::find_if(next.assignment.begin(), next.assignment.end(),
                                 [&](const auto& kv) { return kv.second == slot; });
    if (occupant != next.assignment.end()) {
      *pos = occupant->first;
      next.assignment.erase(occupant);
    } else {
      queue_.erase(pos);
    }
    next.assignment[participant] = slot;
    layout_ = std::move(next);
  }
  Outcome out;
  emit_layout(out, Json{{"op", "set"}, {"participant", participant}, {"slot", slot}});
  return out;
}

Outcome Room::signal(const std::string& from, const std::string& to, const Json& blob) const {
  if (!members_.contains(to)) throw ProtocolFault(codes::kNoSuchPeer, "no peer '" + to + "' in room");
  WireMessage msg;
  msg.type = MessageType::Signal;
  msg.room = id_;
  msg.from = from;
  msg.to = to;
  msg.payload = blob;
  Outcome out;
  out.deliveries.push_back({{to}, std::move(msg)});
  return out;
}

Outcome Room::volume_query(const std::string& from) const {
  WireMessage msg;
  msg.type = MessageType::VolumeUpdate;
  msg.room = id_;
  Json gain_map = Json::object();
  for (const auto& [participant, gain] : gains()) gain_map[participant] = gain;
  msg.payload = Json{{"version", layout_.version}, {"gains", std::move(gain_map)}};
  Outcome out;
  out.deliveries.push_back({{from}, std::move(msg)});
  return out;
}

std::uint64_t state_hash(const layout::LayoutState& layout, const std::deque<std::string>& queue,
                         const layout::GainMap& gains) {
  std::string text = "v=" + std::to_string(layout.version) + ";a=";
  for (const auto& [participant, slot] : layout.assignment) text += participant + ":" + slot + ",";
  text += ";q=";
  for (const auto& q : queue) text += q + ",";
  text += ";g=";
  char buf[32];
  for (const auto& [participant, gain] : gains) {
    std::snprintf(buf, sizeof buf, "%.17g", gain);
    text += participant + ":" + buf + ",";
  }
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

Json policy_to_json(const layout::GainPolicy& policy) {
  if (policy.mode == layout::GainMode::InverseSquare) return Json{{"mode", "inverse-square"}};
  return Json{{"mode", "rank-table"}, {"rank_table", policy.rank_table}};
}

layout::GainPolicy policy_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("mode") || !doc["mode"].is_string())
    throw Error(ErrorCode::Configuration, "gain_policy.mode must be a string");
  layout::GainPolicy policy;
  const auto mode = doc["mode"].get<std::string>();
  if (mode == "inverse-square") {
    policy.mode = layout::GainMode::InverseSquare;
  } else if (mode == "rank-table") {
    if (doc.contains("rank_table")) {
      if (!doc["rank_table"].is_array()) throw Error(ErrorCode::Configuration, "gain_policy.rank_table must be an array");
      policy.rank_table.clear();
      for (const auto& g : doc["rank_table"]) {
        if (!g.is_number()) throw Error(ErrorCode::Configuration, "gain_policy.rank_table must hold numbers");
        policy.rank_table.push_back(g.get<double>());
      }
    }
  } else {
    throw Error(ErrorCode::Configuration, "gain_policy.mode must be 'rank-table' or 'inverse-square'");
  }
  policy.validate();
  return policy;
}

}  // namespace proxilink::session
