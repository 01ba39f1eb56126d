#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>

#include "gesture.hpp"

namespace proxilink::session {

struct ReplayOptions {
  std::filesystem::path trace;
  std::string address;
  std::string room;
  std::string participant = "gesture-feeder";
  gesture::DetectorConfig detector;
  std::chrono::milliseconds timeout{5000};
};

struct ReplaySummary {
  std::size_t samples = 0;
  std::size_t rejected_samples = 0;
  std::size_t gestures = 0;
  std::size_t rotations = 0;
};

// Feeds a recorded hand trace through a wave detector, forwards each detected
// wave to the room as a gesture-event, and reports every rotation the room
// broadcasts in the meantime. `emit` receives one JSON line per gesture,
// rotation, and a final summary.
//
// The trace is parsed before connecting, so a malformed trace fails with
// Format without touching the network; an unreachable server fails with Io;
// a server-side refusal fails with Protocol.
ReplaySummary replay_trace(const ReplayOptions& options, const std::function<void(const std::string&)>& emit);

}  // namespace proxilink::session
