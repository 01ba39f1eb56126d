#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "layout.hpp"
#include "protocol.hpp"

namespace proxilink::session {

// Peers are the remote members placed on slots. Viewers watch the projected
// layout without occupying a slot; sensors (gesture feeders) neither occupy
// a slot nor count as a viewing subject.
enum class Role { Peer, Viewer, Sensor };

const char* role_name(Role role);
Role parse_role(const std::string& text);

struct Member {
  std::string id;
  std::string name;
  Role role = Role::Peer;
};

struct Delivery {
  std::vector<std::string> recipients;
  WireMessage message;
};

struct LogRecord {
  std::string type;
  Json payload;
};

struct Outcome {
  std::vector<Delivery> deliveries;
  std::vector<LogRecord> log;
};

struct RoomSettings {
  layout::SlotSet slots;
  layout::GainPolicy policy;
  std::size_t member_cap = 16;
};

// Authoritative state of one room. Every mutating call either throws a
// ProtocolFault and leaves the room untouched, or returns the messages to
// deliver (in order) and the records to append to the event log.
class Room {
 public:
  Room(std::string id, RoomSettings settings);

  Outcome join(const std::string& participant, const std::string& name, Role role);
  Outcome leave(const std::string& participant);
  Outcome rotate(layout::Direction direction, const std::string& source);
  Outcome set(const std::string& participant, const std::string& slot);
  Outcome signal(const std::string& from, const std::string& to, const Json& blob) const;
  Outcome volume_query(const std::string& from) const;

  const std::string& id() const noexcept { return id_; }
  const RoomSettings& settings() const noexcept { return settings_; }
  bool empty() const noexcept { return members_.empty(); }
  bool has_member(const std::string& participant) const { return members_.contains(participant); }
  std::vector<std::string> member_ids() const { return order_; }
  const layout::LayoutState& layout() const noexcept { return layout_; }
  const std::deque<std::string>& queue() const noexcept { return queue_; }
  std::uint64_t seq() const noexcept { return seq_; }

  // Gain for every peer; queued peers get 0.
  layout::GainMap gains() const;
  Json layout_payload(const Json& cause) const;
  Json snapshot(const std::string& you) const;
  std::uint64_t state_hash() const;

  // Throws Validation when a layout or queue invariant is broken.
  void check_invariants() const;

 private:
  WireMessage broadcast_message(MessageType type, Json payload);
  std::vector<std::string> everyone_except(const std::string& participant) const;
  void emit_layout(Outcome& out, Json cause);

  std::string id_;
  RoomSettings settings_;
  std::map<std::string, Member> members_;
  std::vector<std::string> order_;  // join order
  layout::LayoutState layout_;
  std::deque<std::string> queue_;
  std::uint64_t seq_ = 0;
};

// FNV-1a over a canonical rendering of (version, assignment, queue, gains).
std::uint64_t state_hash(const layout::LayoutState& layout, const std::deque<std::string>& queue,
                         const layout::GainMap& gains);

Json policy_to_json(const layout::GainPolicy& policy);
layout::GainPolicy policy_from_json(const Json& doc);

}  // namespace proxilink::session
