#include "config.hpp"

#include <fstream>
#include <sstream>

#include "error.hpp"

namespace proxilink::session {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::Configuration, "config field '" + field + "': " + why);
}

}  // namespace

ServerConfig parse_server_config(std::string_view text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Configuration, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Configuration, "config must be a JSON object");

  ServerConfig config;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  if (doc.contains("listen")) {
    if (!doc["listen"].is_string()) bad_field("listen", "must be \"host:port\"");
    const auto listen = doc["listen"].get<std::string>();
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos || colon == 0) bad_field("listen", "must be \"host:port\"");
    config.host = listen.substr(0, colon);
    try {
      const int port = std::stoi(listen.substr(colon + 1));
      if (port < 0 || port > 65535) throw std::out_of_range("port");
      config.port = static_cast<std::uint16_t>(port);
    } catch (const std::logic_error&) {
      bad_field("listen", "port must be an integer in [0, 65535]");
    }
  }

  if (doc.contains("room_cap")) {
    if (!doc["room_cap"].is_number_unsigned() || doc["room_cap"].get<std::uint64_t>() == 0)
      bad_field("room_cap", "must be a positive integer");
    config.hub.room_cap = doc["room_cap"].get<std::size_t>();
  }

  if (doc.contains("idle_timeout_s")) {
    if (!doc["idle_timeout_s"].is_number() || doc["idle_timeout_s"].get<double>() < 0)
      bad_field("idle_timeout_s", "must be a non-negative number");
    config.hub.idle_timeout_s = doc["idle_timeout_s"].get<double>();
  }

  if (!doc.contains("calibration_profile") || !doc["calibration_profile"].is_string())
    bad_field("calibration_profile", "missing calibration profile path");
  config.profile_path = resolve(doc["calibration_profile"].get<std::string>());
  try {
    config.hub.profile = calibration::load_profile_file(config.profile_path);
  } catch (const Error& e) {
    bad_field("calibration_profile", e.what());
  }

  if (doc.contains("gain_policy")) {
    try {
      config.hub.policy = policy_from_json(doc["gain_policy"]);
    } catch (const Error& e) {
      bad_field("gain_policy", e.what());
    }
  }
  if (config.hub.policy.mode == layout::GainMode::RankTable &&
      config.hub.policy.rank_table.size() < config.hub.profile.slots.size())
    bad_field("gain_policy", "rank_table has fewer entries than the calibration profile has slots");

  if (doc.contains("gesture_rotation")) {
    const auto& map = doc["gesture_rotation"];
    if (!map.is_object()) bad_field("gesture_rotation", "must map left/right to forward/backward");
    for (const auto& [wave, rotation] : map.items()) {
      gesture::WaveDirection key;
      if (wave == "left")
        key = gesture::WaveDirection::Left;
      else if (wave == "right")
        key = gesture::WaveDirection::Right;
      else
        bad_field("gesture_rotation", "unknown wave direction '" + wave + "'");
      if (!rotation.is_string()) bad_field("gesture_rotation", "rotation must be \"forward\" or \"backward\"");
      try {
        config.hub.gesture_rotation[key] = layout::parse_direction(rotation.get<std::string>());
      } catch (const Error& e) {
        bad_field("gesture_rotation", e.what());
      }
    }
  }

  if (doc.contains("event_log")) {
    if (!doc["event_log"].is_string()) bad_field("event_log", "must be a path");
    config.event_log = resolve(doc["event_log"].get<std::string>());
  }
  return config;
}

ServerConfig load_server_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Configuration, "cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_server_config(buffer.str(), path.parent_path());
}

}  // namespace proxilink::session
