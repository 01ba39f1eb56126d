#pragma once

#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proxilink::gesture {

struct HandSample {
  double t = 0.0;  // seconds
  double x = 0.0;  // millimeters, lateral axis
  double y = 0.0;
  double z = 0.0;
};

enum class WaveDirection { Left, Right };

const char* direction_name(WaveDirection direction);

struct GestureEvent {
  WaveDirection direction = WaveDirection::Right;
  double t_detect = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
};

struct DetectorConfig {
  double window_s = 1.0;
  double min_amplitude_mm = 80.0;
  int min_reversals = 3;
  double cooldown_s = 1.5;
  double jitter_mm = 2.0;

  void validate() const;
};

// Reversal-count + amplitude wave detector on the lateral axis.
//
// Motion is tracked against an anchor sample: a step only counts once x has
// moved at least jitter_mm away from the anchor, and the anchor then follows.
// A reversal is a sign change between consecutive counted steps. A wave fires
// when the sliding window holds >= min_reversals reversals and a peak-to-peak
// span >= min_amplitude_mm, outside any cooldown.
class WaveDetector {
 public:
  explicit WaveDetector(DetectorConfig config = {});

  // Throws Stream on a timestamp earlier than the previous one and
  // InvalidSample on a non-finite coordinate; neither changes state.
  std::optional<GestureEvent> feed(const HandSample& sample);
  void reset();

  const DetectorConfig& config() const noexcept { return config_; }

 private:
  struct Reversal {
    double t;
    int swing_sign;  // sign of the half-swing that ended here
  };

  void prune(double now);

  DetectorConfig config_;
  std::deque<HandSample> window_;
  std::deque<Reversal> reversals_;
  std::optional<double> last_t_;
  std::optional<double> anchor_x_;
  int motion_sign_ = 0;
  std::optional<double> cooldown_until_;
};

// Trace file: JSON lines {"t":..,"x":..,"y":..,"z":..}. Blank lines are
// skipped; a malformed line throws Format naming its 1-based line number.
std::vector<HandSample> parse_trace(std::string_view text);
std::vector<HandSample> load_trace_file(const std::filesystem::path& path);

}  // namespace proxilink::gesture
