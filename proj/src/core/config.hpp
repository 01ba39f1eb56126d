#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hub.hpp"

namespace proxilink::session {

struct ServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;
  std::filesystem::path profile_path;
  std::optional<std::filesystem::path> event_log;
  HubSettings hub;
};

// Relative paths inside the file resolve against the config file's directory.
// Errors are Configuration and name the offending field.
ServerConfig load_server_config(const std::filesystem::path& path);
ServerConfig parse_server_config(std::string_view text, const std::filesystem::path& base_dir);

}  // namespace proxilink::session
