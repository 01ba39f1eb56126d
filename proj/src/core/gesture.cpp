#include "gesture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace proxilink::gesture {

const char* direction_name(WaveDirection direction) {
  return direction == WaveDirection::Left ? "left" : "right";
}

void DetectorConfig::validate() const {
  if (!(window_s > 0) || !(min_amplitude_mm > 0) || min_reversals <= 0 || !(cooldown_s > 0) ||
      !(jitter_mm >= 0))
    throw Error(ErrorCode::Configuration, "detector thresholds must be positive");
}

WaveDetector::WaveDetector(DetectorConfig config) : config_(config) { config_.validate(); }

void WaveDetector::reset() {
  window_.clear();
  reversals_.clear();
  last_t_.reset();
  anchor_x_.reset();
  motion_sign_ = 0;
  cooldown_until_.reset();
}

void WaveDetector::prune(double now) {
  const double horizon = now - config_.window_s;
  while (!window_.empty() && window_.front().t < horizon) window_.pop_front();
  while (!reversals_.empty() && reversals_.front().t < horizon) reversals_.pop_front();
}

std::optional<GestureEvent> WaveDetector::feed(const HandSample& s) {
  if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z))
    throw Error(ErrorCode::InvalidSample, "hand sample has a non-finite field");
  if (last_t_ && s.t < *last_t_)
    throw Error(ErrorCode::Stream, "hand sample timestamp goes backwards");

  last_t_ = s.t;
  window_.push_back(s);
  prune(s.t);

  if (!anchor_x_) {
    anchor_x_ = s.x;
  } else if (const double dx = s.x - *anchor_x_; std::abs(dx) >= config_.jitter_mm) {
    const int sign = dx > 0 ? 1 : -1;
    if (motion_sign_ != 0 && sign != motion_sign_) reversals_.push_back({s.t, motion_sign_});
    motion_sign_ = sign;
    anchor_x_ = s.x;
  }

  if (cooldown_until_) {
    if (s.t < *cooldown_until_) return std::nullopt;
    cooldown_until_.reset();
  }
  if (static_cast<int>(reversals_.size()) < config_.min_reversals) return std::nullopt;

  const auto [lo, hi] = std::minmax_element(window_.begin(), window_.end(),
                                            [](const auto& a, const auto& b) { return a.x < b.x; });
  if (hi->x - lo->x < config_.min_amplitude_mm) return std::nullopt;

  GestureEvent event;
  event.direction = reversals_.back().swing_sign > 0 ? WaveDirection::Right : WaveDirection::Left;
  event.t_detect = s.t;
  event.t_start = window_.front().t;
  event.t_end = s.t;

  cooldown_until_ = s.t + config_.cooldown_s;
  reversals_.clear();
  return event;
}

std::vector<HandSample> parse_trace(std::string_view text) {
  std::vector<HandSample> samples;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::Format, "trace line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw fail("malformed JSON");
    }
    if (!j.is_object()) throw fail("expected an object");
    HandSample s;
    for (auto [key, field] : {std::pair{"t", &s.t}, {"x", &s.x}, {"y", &s.y}, {"z", &s.z}}) {
      if (!j.contains(key) || !j[key].is_number()) throw fail(std::string("missing numeric field '") + key + "'");
      *field = j[key].get<double>();
    }
    samples.push_back(s);
  }
  return samples;
}

std::vector<HandSample> load_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open trace '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_trace(buffer.str());
}

}  // namespace proxilink::gesture
