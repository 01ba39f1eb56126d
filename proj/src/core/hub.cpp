#include "hub.hpp"

#include "error.hpp"

namespace proxilink::session {

double wall_clock_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

void EventLog::append(double t, const std::string& room, const LogRecord& record) {
  Json line = Json::object();
  line["t"] = t;
  line["room"] = room;
  line["type"] = record.type;
  line["payload"] = record.payload;
  std::lock_guard lock(mutex_);
  out_ << line.dump() << '\n';
  out_.flush();
}

SessionHub::SessionHub(HubSettings settings, Clock clock, EventLog* log)
    : settings_(std::move(settings)), clock_(std::move(clock)), log_(log) {
  settings_.policy.validate();
}

SessionHub::ConnectionId SessionHub::attach(std::shared_ptr<Connection> connection) {
  std::lock_guard lock(registry_mutex_);
  const auto id = next_id_++;
  bindings_[id] = Binding{std::move(connection), {}, {}};
  return id;
}

void SessionHub::set_observer(Observer observer) {
  std::lock_guard lock(observer_mutex_);
  observer_ = std::move(observer);
}

void SessionHub::replace_profile(calibration::CalibrationProfile profile) {
  std::lock_guard lock(registry_mutex_);
  settings_.profile = std::move(profile);
}

calibration::CalibrationProfile SessionHub::profile() const {
  std::lock_guard lock(registry_mutex_);
  return settings_.profile;
}

std::size_t SessionHub::room_count() const {
  std::lock_guard lock(registry_mutex_);
  return rooms_.size();
}

std::shared_ptr<SessionHub::RoomEntry> SessionHub::room_entry(const std::string& room_id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = rooms_.find(room_id);
  return it == rooms_.end() ? nullptr : it->second;
}

bool SessionHub::inspect(const std::string& room_id, const std::function<void(const Room&)>& fn) const {
  auto entry = room_entry(room_id);
  if (!entry) return false;
  std::lock_guard lock(entry->mutex);
  if (!entry->room) return false;
  fn(*entry->room);
  return true;
}

void SessionHub::reply(ConnectionId id, const WireMessage& msg) {
  std::shared_ptr<Connection> connection;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = bindings_.find(id);
    if (it == bindings_.end()) return;
    connection = it->second.connection;
  }
  connection->send(msg.encode());
}

void SessionHub::deliver(RoomEntry& entry, const Outcome& outcome) {
  const double now = clock_();
  if (log_)
    for (const auto& record : outcome.log) log_->append(now, entry.room->id(), record);
  for (const auto& delivery : outcome.deliveries) {
    const std::string frame = delivery.message.encode();
    for (const auto& recipient : delivery.recipients) {
      auto it = entry.connections.find(recipient);
      if (it == entry.connections.end()) continue;
      if (auto connection = it->second.lock()) connection->send(frame);
    }
  }
  Observer observer;
  {
    std::lock_guard lock(observer_mutex_);
    observer = observer_;
  }
  if (observer && !outcome.log.empty()) observer(*entry.room);
}

void SessionHub::receive(ConnectionId id, std::string_view frame) {
  try {
    handle(id, decode(frame));
  } catch (const ProtocolFault& fault) {
    reply(id, make_error(fault.code(), fault.what()));
    if (fault.close()) {
      std::shared_ptr<Connection> connection;
      {
        std::lock_guard lock(registry_mutex_);
        if (auto it = bindings_.find(id); it != bindings_.end()) connection = it->second.connection;
      }
      if (connection) connection->close();
    }
  } catch (const Error& error) {
    const char* code = error.code() == ErrorCode::NotFound ? codes::kNotFound : codes::kBadRequest;
    reply(id, make_error(code, error.what()));
  }
}

namespace {

std::string payload_string(const WireMessage& msg, const char* key) {
  if (!msg.payload.is_object() || !msg.payload.contains(key) || !msg.payload[key].is_string())
    throw ProtocolFault(codes::kBadRequest, std::string("payload needs a string '") + key + "'");
  return msg.payload[key].get<std::string>();
}

}  // namespace

void SessionHub::handle(ConnectionId id, const WireMessage& msg) {
  switch (msg.type) {
    case MessageType::Join:
      handle_join(id, msg);
      return;
    case MessageType::PeerLeft:
      handle_leave(id);
      return;
    case MessageType::Joined:
    case MessageType::PeerJoined:
    case MessageType::LayoutState:
    case MessageType::Error:
      throw ProtocolFault(codes::kBadRequest, std::string("'") + type_name(msg.type) + "' is server-only");
    default:
      break;
  }

  std::string room_id, participant;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = bindings_.find(id);
    if (it == bindings_.end() || it->second.participant.empty())
      throw ProtocolFault(codes::kNotJoined, "join a room first");
    room_id = it->second.room;
    participant = it->second.participant;
  }
  auto entry = room_entry(room_id);
  if (!entry) throw ProtocolFault(codes::kNotJoined, "room no longer exists");

  std::lock_guard lock(entry->mutex);
  Room& room = *entry->room;
  Outcome outcome;
  switch (msg.type) {
    case MessageType::Signal:
      if (msg.to.empty()) throw ProtocolFault(codes::kBadRequest, "signal needs a 'to' participant");
      outcome = room.signal(participant, msg.to, msg.payload);
      break;
    case MessageType::LayoutSet:
      outcome = room.set(payload_string(msg, "participant"), payload_string(msg, "slot"));
      break;
    case MessageType::LayoutRotate: {
      layout::Direction direction;
      try {
        direction = layout::parse_direction(payload_string(msg, "direction"));
      } catch (const Error& e) {
        throw ProtocolFault(codes::kBadRequest, e.what());
      }
      outcome = room.rotate(direction, "ui");
      break;
    }
    case MessageType::GestureEvent: {
      const auto wave = payload_string(msg, "direction");
      if (wave != "left" && wave != "right") throw ProtocolFault(codes::kBadRequest, "wave direction must be left or right");
      const auto direction = settings_.gesture_rotation.at(wave == "left" ? gesture::WaveDirection::Left
                                                                          : gesture::WaveDirection::Right);
      outcome = room.rotate(direction, "gesture");
      Json record = msg.payload;
      record["from"] = participant;
      record["rotation"] = layout::direction_name(direction);
      outcome.log.insert(outcome.log.begin(), LogRecord{"gesture-event", std::move(record)});
      break;
    }
    case MessageType::VolumeUpdate:
      outcome = room.volume_query(participant);
      break;
    default:
      throw ProtocolFault(codes::kBadRequest, "unexpected message type");
  }
  deliver(*entry, outcome);
}

void SessionHub::handle_join(ConnectionId id, const WireMessage& msg) {
  std::shared_ptr<Connection> connection;
  {
    std::lock_guard lock(registry_mutex_);
    auto& binding = bindings_.at(id);
    if (!binding.participant.empty()) throw ProtocolFault(codes::kAlreadyJoined, "connection already joined a room");
    connection = binding.connection;
  }
  if (msg.room.empty()) throw ProtocolFault(codes::kBadRequest, "join needs a 'room'");
  if (msg.from.empty()) throw ProtocolFault(codes::kBadRequest, "join needs a participant id in 'from'");

  std::string name = msg.from;
  Role role = Role::Peer;
  if (msg.payload.is_object()) {
    if (msg.payload.contains("name") && msg.payload["name"].is_string()) name = msg.payload["name"].get<std::string>();
    if (msg.payload.contains("role")) {
      if (!msg.payload["role"].is_string()) throw ProtocolFault(codes::kBadRequest, "role must be a string");
      role = parse_role(msg.payload["role"].get<std::string>());
    }
  }

  std::shared_ptr<RoomEntry> entry;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = rooms_.find(msg.room);
    if (it == rooms_.end()) {
      auto fresh = std::make_shared<RoomEntry>();
      fresh->room = std::make_unique<Room>(
          msg.room, RoomSettings{settings_.profile.slot_set(), settings_.policy, settings_.room_cap});
      it = rooms_.emplace(msg.room, std::move(fresh)).first;
    }
    entry = it->second;
    // Rooms are only retired while the registry lock is held, so clearing the
    // idle mark here (under both locks) keeps the entry alive.
    std::lock_guard room_lock(entry->mutex);
    entry->idle_since.reset();
  }

  {
    std::lock_guard lock(entry->mutex);
    Outcome outcome;
    try {
      outcome = entry->room->join(msg.from, name, role);
    } catch (...) {
      if (entry->room->empty()) entry->idle_since = clock_();
      throw;
    }
    entry->connections[msg.from] = connection;
    deliver(*entry, outcome);
  }
  // Frames of one connection are handled sequentially, so binding after the
  // room lock is released cannot race with this connection's next frame.
  std::lock_guard lock(registry_mutex_);
  auto& binding = bindings_.at(id);
  binding.room = msg.room;
  binding.participant = msg.from;
}

void SessionHub::handle_leave(ConnectionId id) {
  std::string room_id, participant;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = bindings_.find(id);
    if (it == bindings_.end() || it->second.participant.empty()) return;
    room_id = std::exchange(it->second.room, {});
    participant = std::exchange(it->second.participant, {});
  }
  auto entry = room_entry(room_id);
  if (!entry) return;
  std::lock_guard lock(entry->mutex);
  auto outcome = entry->room->leave(participant);
  entry->connections.erase(participant);
  deliver(*entry, outcome);
  if (entry->room->empty()) entry->idle_since = clock_();
}

void SessionHub::detach(ConnectionId id) {
  handle_leave(id);
  std::lock_guard lock(registry_mutex_);
  bindings_.erase(id);
}

void SessionHub::sweep() {
  const double now = clock_();
  std::lock_guard lock(registry_mutex_);
  for (auto it = rooms_.begin(); it != rooms_.end();) {
    std::unique_lock room_lock(it->second->mutex);
    const auto& idle = it->second->idle_since;
    if (it->second->room->empty() && idle && now - *idle >= settings_.idle_timeout_s) {
      room_lock.unlock();
      it = rooms_.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace proxilink::session
