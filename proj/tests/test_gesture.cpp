#include <doctest.h>

#include <cmath>
#include <vector>

#include "error.hpp"
#include "gesture.hpp"
#include "support/oracles.hpp"

using namespace proxilink;
using namespace proxilink::gesture;

namespace {

constexpr double kPi = 3.14159265358979323846;
const std::string kTraces = std::string(PROXILINK_DATA_DIR) + "/traces/";

std::vector<HandSample> sine(double amplitude, double hz, double duration, double rate = 60.0, double t0 = 0.0,
                             double x0 = 0.0) {
  std::vector<HandSample> out;
  const int n = static_cast<int>(std::lround(duration * rate));
  for (int i = 0; i <= n; ++i) {
    const double t = i / rate;
    out.push_back({t0 + t, x0 + amplitude * std::sin(2 * kPi * hz * t), 0, 0});
  }
  return out;
}

std::vector<GestureEvent> run(WaveDetector& d, const std::vector<HandSample>& samples) {
  std::vector<GestureEvent> events;
  for (const auto& s : samples)
    if (auto e = d.feed(s)) events.push_back(*e);
  return events;
}

std::vector<GestureEvent> run(const std::vector<HandSample>& samples, DetectorConfig config = {}) {
  WaveDetector d(config);
  return run(d, samples);
}

}  // namespace

TEST_CASE("canonical sinusoid yields exactly one wave") {
  const auto events = run(sine(100, 3, 1.0));
  REQUIRE(events.size() == 1);
  CHECK(events[0].direction == WaveDirection::Right);
}

TEST_CASE("oracle: the wave fires on the sample confirming the third analytic extremum") {
  // x = 100 sin(6 pi t) turns at t = (2k+1)/12. A turn is confirmed by the
  // first later sample that has moved at least jitter_mm back from it.
  const auto samples = sine(100, 3, 1.0);
  const auto extrema = oracle::sine_extrema(3, 1.0);
  REQUIRE(extrema.size() == 6);
  for (int k = 1; k <= 6; ++k) {
    DetectorConfig config;
    config.min_reversals = k;
    const auto events = run(samples, config);
    REQUIRE(events.size() == 1);
    const double turn = extrema[k - 1];
    const double peak = 100 * std::sin(2 * kPi * 3 * turn);
    double confirm = -1;
    for (const auto& s : samples) {
      if (s.t > turn && std::abs(s.x - peak) >= config.jitter_mm) {
        confirm = s.t;
        break;
      }
    }
    CHECK(events[0].t_detect == doctest::Approx(confirm));
  }
}

TEST_CASE("direction is the last completed half-swing") {
  // Starting with a leftward swing flips the phase, so the third turn ends a
  // leftward half-swing.
  auto flipped = sine(-100, 3, 1.0);
  const auto events = run(flipped);
  REQUIRE(events.size() == 1);
  CHECK(events[0].direction == WaveDirection::Left);
}

TEST_CASE("no wave from stillness, linear drift, or small waves") {
  std::vector<HandSample> still, drift;
  for (int i = 0; i <= 120; ++i) {
    const double t = i / 60.0;
    still.push_back({t, 5.0 + ((i % 3) - 1) * 0.9, 0, 0});
    drift.push_back({t, 50.0 * t, 0, 0});
  }
  CHECK(run(still).empty());
  CHECK(run(drift).empty());
  CHECK(run(sine(30, 3, 1.0)).empty());
}

TEST_CASE("cooldown suppresses a second wave until it expires") {
  auto two = sine(100, 3, 1.0);
  auto later = sine(100, 3, 1.0, 60.0, 1.2);
  two.insert(two.end(), later.begin() + 1, later.end());
  const auto events = run(two);
  REQUIRE(events.size() == 2);
  CHECK(events[1].t_detect - events[0].t_detect >= 1.5);

  auto soon = sine(100, 3, 1.0);
  auto next = sine(100, 3, 0.5, 60.0, 1.0);
  soon.insert(soon.end(), next.begin() + 1, next.end());
  CHECK(run(soon).size() == 1);
}

TEST_CASE("reset mid-cooldown re-arms the detector") {
  WaveDetector d;
  CHECK(run(d, sine(100, 3, 1.0)).size() == 1);
  d.reset();
  CHECK(run(d, sine(100, 3, 1.0, 60.0, 1.1)).size() == 1);
}

TEST_CASE("property: detection is invariant to lateral offset and time shift") {
  const auto base = run(sine(100, 3, 1.0));
  for (double x0 : {-300.0, 0.5, 750.0}) {
    for (double t0 : {0.0, 17.25, 86400.0}) {
      const auto shifted = run(sine(100, 3, 1.0, 60.0, t0, x0));
      REQUIRE(shifted.size() == base.size());
      CHECK(shifted[0].t_detect - t0 == doctest::Approx(base[0].t_detect).epsilon(1e-9));
      CHECK(shifted[0].direction == base[0].direction);
    }
  }
}

TEST_CASE("property: detection survives other sample rates") {
  for (double rate : {30.0, 90.0, 120.0, 240.0}) CHECK(run(sine(100, 3, 1.0, rate)).size() == 1);
}

TEST_CASE("bad samples are rejected without changing state") {
  WaveDetector d;
  d.feed({1.0, 0, 0, 0});
  try {
    d.feed({0.5, 0, 0, 0});
    FAIL("expected Stream");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Stream);
  }
  try {
    d.feed({2.0, std::nan(""), 0, 0});
    FAIL("expected InvalidSample");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSample);
  }
  CHECK_NOTHROW(d.feed({1.0, 0, 0, 0}));
  CHECK_THROWS_AS(WaveDetector(DetectorConfig{0.0, 80, 3, 1.5, 2}), Error);
}

TEST_CASE("bundled traces match the detector contract") {
  CHECK(run(load_trace_file(kTraces + "canonical.jsonl")).size() == 1);
  CHECK(run(load_trace_file(kTraces + "static.jsonl")).empty());
  CHECK(run(load_trace_file(kTraces + "drift.jsonl")).empty());
  CHECK(run(load_trace_file(kTraces + "sub_amplitude.jsonl")).empty());
  const auto double_wave = run(load_trace_file(kTraces + "double_wave.jsonl"));
  REQUIRE(double_wave.size() == 2);
  CHECK(double_wave[1].t_detect - double_wave[0].t_detect >= 1.5);
}

TEST_CASE("trace parser names the bad line") {
  try {
    parse_trace("{\"t\":0,\"x\":0,\"y\":0,\"z\":0}\n\n{\"t\":0.1,\"x\":oops}\n");
    FAIL("expected Format");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Format);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(parse_trace("{\"t\":0,\"x\":1,\"y\":2,\"z\":3}\n").size() == 1);
}
