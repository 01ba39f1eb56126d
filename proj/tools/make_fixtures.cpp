// Regenerates the bundled fixtures under data/ from the engine itself:
// gesture traces, the homography golden file, and the study event log and
// declarations (recorded by a real SessionHub on a simulated clock).
//
//   make_fixtures <data-dir> <out-dir>
//
// <data-dir> supplies default_profile.json; outputs go to <out-dir>. The
// output is deterministic, and a test checks it matches the committed files.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "calibration.hpp"
#include "hub.hpp"

namespace fs = std::filesystem;
using namespace proxilink;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kPi = 3.14159265358979323846;

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out.flush()) throw std::runtime_error("cannot write " + path.string());
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// Uniform in [-1, 1) from the raw engine output, which is portable, unlike
// the standard distributions.
double unit_noise(std::mt19937& rng) { return static_cast<double>(rng()) / 2147483648.0 - 1.0; }

std::string trace(double rate_hz, double duration_s, const std::function<double(double)>& x_of_t,
                  std::uint32_t seed, double noise_mm) {
  std::mt19937 rng(seed);
  std::string out;
  const int n = static_cast<int>(std::lround(duration_s * rate_hz));
  for (int i = 0; i <= n; ++i) {
    const double t = i / rate_hz;
    const double x = x_of_t(t) + noise_mm * unit_noise(rng);
    const double y = 150.0 + noise_mm * unit_noise(rng);
    const double z = 420.0 + noise_mm * unit_noise(rng);
    out += Json{{"t", round_to(t, 1e-6)}, {"x", round_to(x, 1e-3)}, {"y", round_to(y, 1e-3)}, {"z", round_to(z, 1e-3)}}
               .dump();
    out += '\n';
  }
  return out;
}

void make_traces(const fs::path& out) {
  const auto wave = [](double amplitude, double hz) {
    return [=](double t) { return amplitude * std::sin(2 * kPi * hz * t); };
  };
  // 3 Hz, 200 mm peak to peak, one second at 60 Hz.
  write_file(out / "traces/canonical.jsonl", trace(60, 1.0, wave(100, 3), 1, 0.0));
  // Hand held still; sensor noise stays inside the jitter deadband.
  write_file(out / "traces/static.jsonl", trace(60, 2.0, [](double) { return 12.0; }, 2, 0.8));
  // Slow sway, wide but with at most one reversal per second.
  write_file(out / "traces/drift.jsonl", trace(60, 4.0, wave(150, 0.2), 3, 0.8));
  // Right frequency, too small: 60 mm peak to peak.
  write_file(out / "traces/sub_amplitude.jsonl", trace(60, 1.0, wave(30, 3), 4, 0.0));
  // Two one-second waves separated by a one-second pause.
  write_file(out / "traces/double_wave.jsonl", trace(60, 3.0, [](double t) {
    if (t <= 1.0 || t >= 2.0) return 100 * std::sin(2 * kPi * 3 * t);
    return 0.0;
  }, 5, 0.0));
}

void make_golden(const fs::path& out, const calibration::CalibrationProfile& profile) {
  Json cases = Json::array();
  const auto unit = calibration::Quad::unit();
  auto quad_json = [](const calibration::Quad& q) {
    Json j = Json::array();
    for (const auto& c : q.corners) j.push_back({c.x, c.y});
    return j;
  };
  for (const auto& slot : profile.slots) {
    const auto h = calibration::solve_homography(unit, slot.quad);
    Json m = Json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m.push_back(h(r, c));
    cases.push_back({{"slot", slot.id}, {"source", quad_json(unit)}, {"target", quad_json(slot.quad)}, {"h", m}});
  }
  write_file(out / "golden/homography.json", cases.dump(2) + "\n");
}

class NullConnection : public session::Connection {
 public:
  void send(std::string) override {}
  void close() override {}
};

enum class Pattern { Conforming, Swapped, Cycled };

struct Subject {
  std::string id;
  std::string room;
  std::vector<std::string> intimacy;  // closest first
  Pattern pattern = Pattern::Conforming;

  // Peers by distance rank in the arrangement the subject mostly kept.
  std::vector<std::string> arrangement() const {
    switch (pattern) {
      case Pattern::Conforming: return intimacy;
      case Pattern::Swapped: return {intimacy[2], intimacy[1], intimacy[0]};
      case Pattern::Cycled: return {intimacy[1], intimacy[2], intimacy[0]};
    }
    return intimacy;
  }
};

std::vector<Subject> study_subjects() {
  std::mt19937 rng(2024);
  std::vector<Subject> subjects;
  for (int g = 1; g <= 3; ++g) {
    const std::string prof = "g" + std::to_string(g) + "-prof";
    for (int s = 1; s <= 3; ++s) {
      Subject subject;
      subject.id = "g" + std::to_string(g) + "-s" + std::to_string(s);
      subject.room = subject.id + "-view";
      for (int o = 1; o <= 3; ++o)
        if (o != s) subject.intimacy.push_back("g" + std::to_string(g) + "-s" + std::to_string(o));
      subject.intimacy.push_back(prof);
      // Deterministic Fisher-Yates on the raw engine output.
      for (std::size_t i = subject.intimacy.size() - 1; i > 0; --i) std::swap(subject.intimacy[i], subject.intimacy[rng() % (i + 1)]);
      subjects.push_back(std::move(subject));
    }
  }
  subjects[5].pattern = Pattern::Swapped;
  subjects[6].pattern = Pattern::Cycled;
  return subjects;
}

void make_study(const fs::path& out, const calibration::CalibrationProfile& profile) {
  std::ostringstream log_text;
  session::EventLog log(log_text);
  session::HubSettings settings;
  settings.profile = profile;
  double now = 0.0;
  session::SessionHub hub(settings, [&] { return now; }, &log);

  auto frame = [](const std::string& type, const std::string& room, const std::string& from, Json payload) {
    return Json{{"v", 1}, {"type", type}, {"room", room}, {"from", from}, {"payload", std::move(payload)}}.dump();
  };

  std::mt19937 rng(7);
  auto jitter = [&](double lo, double hi) { return lo + (hi - lo) * (unit_noise(rng) + 1.0) / 2.0; };
  auto tick = [&](double lo, double hi) { now = round_to(now + jitter(lo, hi), 0.5); };

  Json declarations = Json::array();
  for (const auto& s : study_subjects()) {
    now = round_to(now + 600.0, 0.5);  // sessions run back to back with a short break

    std::map<std::string, session::SessionHub::ConnectionId> conn;
    auto join = [&](const std::string& who, const std::string& role) {
      conn[who] = hub.attach(std::make_shared<NullConnection>());
      hub.receive(conn[who], frame("join", s.room, who, {{"name", who}, {"role", role}}));
    };
    auto send = [&](const std::string& who, const std::string& type, Json payload) {
      hub.receive(conn.at(who), frame(type, s.room, who, std::move(payload)));
    };

    join(s.id, "viewer");
    for (const auto& peer : s.arrangement()) {
      tick(2, 20);
      join(peer, "peer");
    }
    const std::string sensor = s.id + "-hand";
    tick(1, 5);
    join(sensor, "sensor");

    // About three hours in the preferred arrangement, with two excursions.
    tick(2400, 3600);
    send(sensor, "gesture-event", {{"kind", "wave"}, {"direction", "right"}});
    tick(600, 1500);
    send(sensor, "gesture-event", {{"kind", "wave"}, {"direction", "left"}});
    tick(2400, 3000);
    send(s.id, "layout-rotate", {{"direction", "backward"}});
    tick(600, 1500);
    send(s.id, "layout-rotate", {{"direction", "forward"}});
    tick(1800, 2400);

    for (const auto& peer : s.arrangement()) {
      send(peer, "peer-left", Json::object());
      tick(1, 4);
    }
    send(sensor, "peer-left", Json::object());
    tick(1, 2);
    send(s.id, "peer-left", Json::object());
    for (const auto& [who, id] : conn) hub.detach(id);

    declarations.push_back({{"subject", s.id}, {"ranking", s.intimacy}});
  }

  write_file(out / "study/events.jsonl", log_text.str());
  write_file(out / "study/declarations.json", declarations.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_fixtures <data-dir> <out-dir>\n";
    return 1;
  }
  try {
    const fs::path data = argv[1];
    const fs::path out = argv[2];
    const auto profile = calibration::load_profile_file(data / "default_profile.json");
    make_traces(out);
    make_golden(out, profile);
    make_study(out, profile);
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
