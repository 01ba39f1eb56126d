#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "calibration.hpp"
#include "gesture.hpp"
#include "room.hpp"

namespace proxilink::session {

// Outbound side of one client connection. send() must not block; frames
// passed to it are delivered in call order.
class Connection {
 public:
  virtual ~Connection() = default;
  virtual void send(std::string frame) = 0;
  virtual void close() = 0;
};

using Clock = std::function<double()>;

double wall_clock_seconds();

// Append-only JSONL log of room mutations:
// {"t":..,"room":..,"type":..,"payload":..}
class EventLog {
 public:
  explicit EventLog(std::ostream& out) : out_(out) {}
  void append(double t, const std::string& room, const LogRecord& record);

 private:
  std::mutex mutex_;
  std::ostream& out_;
};

struct HubSettings {
  calibration::CalibrationProfile profile;
  layout::GainPolicy policy;
  std::size_t room_cap = 16;
  double idle_timeout_s = 300.0;
  std::map<gesture::WaveDirection, layout::Direction> gesture_rotation{
      {gesture::WaveDirection::Right, layout::Direction::Forward},
      {gesture::WaveDirection::Left, layout::Direction::Backward}};
};

// Routes client frames to rooms. Mutations of one room run strictly one at a
// time in arrival order, and their deliveries are handed to connections while
// the room is still locked, so every member sees the same broadcast order.
// Different rooms only share the short registry lock. Lock order is
// registry before room; the observer lock is a leaf.
class SessionHub {
 public:
  using ConnectionId = std::uint64_t;
  using Observer = std::function<void(const Room&)>;

  explicit SessionHub(HubSettings settings, Clock clock = wall_clock_seconds, EventLog* log = nullptr);

  ConnectionId attach(std::shared_ptr<Connection> connection);
  void receive(ConnectionId id, std::string_view frame);
  // Disconnect; the bound participant (if any) leaves its room.
  void detach(ConnectionId id);

  // Drops rooms that have been empty for at least idle_timeout_s.
  void sweep();

  // Called after every successful mutation, with the room locked.
  void set_observer(Observer observer);

  void replace_profile(calibration::CalibrationProfile profile);
  calibration::CalibrationProfile profile() const;

  std::size_t room_count() const;
  // Runs `fn` on the room under its lock; false if no such room.
  bool inspect(const std::string& room_id, const std::function<void(const Room&)>& fn) const;

 private:
  struct RoomEntry {
    std::mutex mutex;
    std::unique_ptr<Room> room;
    std::map<std::string, std::weak_ptr<Connection>> connections;
    std::optional<double> idle_since;
  };

  struct Binding {
    std::shared_ptr<Connection> connection;
    std::string room;
    std::string participant;
  };

  void handle(ConnectionId id, const WireMessage& msg);
  void handle_join(ConnectionId id, const WireMessage& msg);
  void handle_leave(ConnectionId id);
  void deliver(RoomEntry& entry, const Outcome& outcome);
  void reply(ConnectionId id, const WireMessage& msg);
  std::shared_ptr<RoomEntry> room_entry(const std::string& room_id) const;

  HubSettings settings_;
  Clock clock_;
  EventLog* log_;
  std::mutex observer_mutex_;
  Observer observer_;

  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<RoomEntry>> rooms_;
  std::map<ConnectionId, Binding> bindings_;
  ConnectionId next_id_ = 1;
};

}  // namespace proxilink::session
