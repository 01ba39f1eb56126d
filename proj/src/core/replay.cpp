#include "replay.hpp"

#include "client.hpp"
#include "error.hpp"

namespace proxilink::session {

namespace {

WireMessage request(MessageType type, Json payload) {
  WireMessage msg;
  msg.type = type;
  msg.payload = std::move(payload);
  return msg;
}

}  // namespace

ReplaySummary replay_trace(const ReplayOptions& options, const std::function<void(const std::string&)>& emit) {
  const auto samples = gesture::load_trace_file(options.trace);
  gesture::WaveDetector detector(options.detector);

  WireClient client;
  client.connect(options.address);

  ReplaySummary summary;
  summary.samples = samples.size();

  // Reads until `done` accepts a frame, reporting rotations on the way.
  auto pump = [&](const std::function<bool(const WireMessage&)>& done) {
    for (;;) {
      auto msg = client.receive(options.timeout);
      if (!msg) throw Error(ErrorCode::Io, "server went quiet or closed the connection");
      if (msg->type == MessageType::Error)
        throw Error(ErrorCode::Protocol, "server error " + msg->payload.value("code", std::string("?")) + ": " +
                                             msg->payload.value("message", std::string()));
      if (msg->type == MessageType::LayoutState && msg->payload.value("cause", Json::object()).value("op", "") == "rotate") {
        ++summary.rotations;
        Json line{{"event", "rotation"},
                  {"seq", msg->seq.value_or(0)},
                  {"version", msg->payload["version"]},
                  {"direction", msg->payload["cause"]["direction"]},
                  {"source", msg->payload["cause"]["source"]},
                  {"gains", msg->payload["gains"]}};
        emit(line.dump());
      }
      if (done(*msg)) return;
    }
  };

  WireMessage join = request(MessageType::Join, Json{{"name", "gesture replay"}, {"role", "sensor"}});
  join.room = options.room;
  join.from = options.participant;
  client.send(join);
  pump([](const WireMessage& m) { return m.type == MessageType::Joined; });

  for (const auto& sample : samples) {
    std::optional<gesture::GestureEvent> event;
    try {
      event = detector.feed(sample);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidSample) throw;
      ++summary.rejected_samples;
      continue;
    }
    if (!event) continue;
    ++summary.gestures;
    const Json payload{{"kind", "wave"},
                       {"direction", gesture::direction_name(event->direction)},
                       {"t_detect", event->t_detect},
                       {"window", Json::array({event->t_start, event->t_end})}};
    Json line{{"event", "gesture"}};
    line.update(payload);
    emit(line.dump());
    client.send(request(MessageType::GestureEvent, payload));
  }

  // Loopback signal: once it returns, every broadcast caused by our gestures
  // has already been delivered on this connection.
  WireMessage marker = request(MessageType::Signal, Json{{"replay", "done"}});
  marker.to = options.participant;
  client.send(marker);
  pump([&](const WireMessage& m) { return m.type == MessageType::Signal && m.from == options.participant; });

  client.send(request(MessageType::PeerLeft, Json::object()));
  client.close();

  emit(Json{{"event", "summary"},
            {"samples", summary.samples},
            {"rejected_samples", summary.rejected_samples},
            {"gestures", summary.gestures},
            {"rotations", summary.rotations}}
           .dump());
  return summary;
}

}  // namespace proxilink::session
