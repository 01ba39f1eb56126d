// Acceptance run: one PASS/FAIL line per criterion. Tolerances and time
// budgets are fixed here and never relaxed at run time.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "audio_mix.hpp"
#include "calibration.hpp"
#include "client.hpp"
#include "config.hpp"
#include "error.hpp"
#include "gesture.hpp"
#include "layout.hpp"
#include "replica.hpp"
#include "server.hpp"
#include "support/oracles.hpp"
#include "support/process.hpp"

using namespace proxilink;
namespace fs = std::filesystem;
using Stopwatch = std::chrono::steady_clock;

namespace {

const fs::path kData = PROXILINK_DATA_DIR;
const std::string kCli = PROXILINK_CLI;

constexpr double kHomographyCornerTol = 1e-9;
constexpr double kRoundTripTol = 1e-6;
constexpr double kRmsTol = 1e-9;
constexpr double kLinearityTol = 1e-12;
constexpr double kCooldownS = 1.5;

struct Outcome {
  bool ok;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::chrono::milliseconds budget;
  std::function<Outcome()> check;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome gain_law() {
  const layout::SlotSet slots({{"far", "Wall", 3.0, ""}, {"close", "Desk", 0.4, ""}, {"middle", "Shelf", 1.0, ""}});
  layout::LayoutState state;
  state.assignment = {{"a", "close"}, {"b", "middle"}, {"c", "far"}};
  const auto gains = layout::gains_for_layout(state, slots, layout::GainPolicy{});
  const bool ok = gains.at("a") == 1.0 && gains.at("b") == 0.25 && gains.at("c") == 0.1;
  char buf[128];
  std::snprintf(buf, sizeof buf, "gains %.17g/%.17g/%.17g", gains.at("a"), gains.at("b"), gains.at("c"));
  return {ok, buf};
}

Outcome zones() {
  const std::vector<std::pair<double, layout::Zone>> cases{{0.30, layout::Zone::Intimate},
                                                           {1.0, layout::Zone::Personal},
                                                           {2.0, layout::Zone::Social},
                                                           {4.0, layout::Zone::Public}};
  std::string detail;
  bool ok = true;
  for (const auto& [d, zone] : cases) {
    const auto got = layout::classify_zone(d);
    ok = ok && got == zone;
    if (!detail.empty()) detail += ", ";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f->%s", d, layout::zone_name(got));
    detail += buf;
  }
  return {ok, detail};
}

calibration::Quad to_quad(const oracle::Quad4& q) {
  calibration::Quad out;
  for (int i = 0; i < 4; ++i) out.corners[i] = {q[i].x, q[i].y};
  return out;
}

Outcome homography() {
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_corner = 0, worst_round_trip = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto src = to_quad(oracle::random_convex_quad(rng));
    const auto dst = to_quad(oracle::random_convex_quad(rng));
    const auto h = calibration::solve_homography(src, dst);
    for (int k = 0; k < 4; ++k) {
      const auto p = calibration::apply(h, src.corners[k]);
      worst_corner = std::max({worst_corner, std::abs(p.x - dst.corners[k].x), std::abs(p.y - dst.corners[k].y)});
    }
    const auto inv = calibration::invert(h);
    const calibration::Point p{unit(rng), unit(rng)};
    const auto back = calibration::apply(inv, calibration::apply(h, p));
    worst_round_trip = std::max({worst_round_trip, std::abs(back.x - p.x), std::abs(back.y - p.y)});
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "max corner error %.2e (<%.0e), max round-trip %.2e (<%.0e)", worst_corner,
                kHomographyCornerTol, worst_round_trip, kRoundTripTol);
  return {worst_corner < kHomographyCornerTol && worst_round_trip < kRoundTripTol, buf};
}

Outcome audio_law() {
  audio::PcmFrame sine;
  for (int i = 0; i < 48000; ++i) sine.samples.push_back(std::sin(2 * M_PI * 440.0 * i / 48000.0));
  const auto quiet = audio::apply_gain(sine, 0.25);
  const double ratio = audio::rms(quiet.samples) / audio::rms(sine.samples);

  // Linearity: the mix equals the gain-weighted sum while nothing clips.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> amp(-0.3, 0.3), gain(0.0, 1.0);
  double worst = 0;
  for (int set = 0; set < 100; ++set) {
    const int n = 256;
    std::vector<audio::PcmFrame> frames(3);
    std::map<std::string, double> gains;
    for (int k = 0; k < 3; ++k) {
      frames[k].participant = "p" + std::to_string(k);
      for (int i = 0; i < n; ++i) frames[k].samples.push_back(amp(rng));
      gains[frames[k].participant] = gain(rng);
    }
    const auto mixed = audio::mix(frames, gains);
    for (int i = 0; i < n; ++i) {
      double expected = 0;
      for (int k = 0; k < 3; ++k) expected += gains[frames[k].participant] * frames[k].samples[i];
      worst = std::max(worst, std::abs(mixed.samples[i] - expected));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "rms ratio %.12f (±%.0e), linearity max error %.2e over 100 sets", ratio, kRmsTol,
                worst);
  return {std::abs(ratio - 0.25) <= kRmsTol && worst <= kLinearityTol, buf};
}

std::vector<gesture::GestureEvent> detect(const std::string& trace) {
  gesture::WaveDetector detector;
  std::vector<gesture::GestureEvent> events;
  for (const auto& s : gesture::load_trace_file(kData / "traces" / trace))
    if (auto e = detector.feed(s)) events.push_back(*e);
  return events;
}

Outcome gesture_corpus() {
  const auto canonical = detect("canonical.jsonl").size();
  const auto still = detect("static.jsonl").size();
  const auto drift = detect("drift.jsonl").size();
  const auto small = detect("sub_amplitude.jsonl").size();
  const auto twice = detect("double_wave.jsonl");
  const double gap = twice.size() == 2 ? twice[1].t_detect - twice[0].t_detect : 0.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "canonical %zu, static %zu, drift %zu, sub-amplitude %zu, double-wave %zu (gap %.3f s)",
                canonical, still, drift, small, twice.size(), gap);
  return {canonical == 1 && still == 0 && drift == 0 && small == 0 && twice.size() == 2 && gap >= kCooldownS, buf};
}

// Four clients on a live server; after every operation each joined client
// must mirror the server's room state exactly.
Outcome convergence() {
  using namespace session;
  const fs::path dir = fs::temp_directory_path() / ("proxilink_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  fs::copy_file(kData / "default_profile.json", dir / "profile.json");
  std::ofstream(dir / "server.json") << R"({"listen":"127.0.0.1:0","calibration_profile":"profile.json"})";

  std::atomic<std::size_t> observed{0}, violations{0};
  std::string outcome_detail;
  bool ok = true;
  {
    Server server(load_server_config(dir / "server.json"));
    server.hub().set_observer([&](const Room& room) {
      ++observed;
      try {
        room.check_invariants();
      } catch (const Error&) {
        ++violations;
      }
    });
    server.listen();
    std::thread io([&] { server.run(); });
    const auto address = server.address();

    const std::vector<std::string> names{"c0", "c1", "c2", "c3"};
    std::map<std::string, std::unique_ptr<WireClient>> clients;
    std::map<std::string, RoomReplica> replicas;
    std::mt19937 rng(99);
    std::size_t mismatches = 0, checks = 0, joins = 0, leaves = 0, rotations = 0;

    auto message = [](MessageType type, Json payload) {
      WireMessage m;
      m.type = type;
      m.payload = std::move(payload);
      return m;
    };
    // Frames up to `until` feed the replica; false on timeout.
    auto pump = [&](const std::string& who, const std::function<bool(const WireMessage&)>& until) {
      for (;;) {
        auto m = clients[who]->receive(std::chrono::seconds(5));
        if (!m) return false;
        if (m->type != MessageType::Error) replicas[who].apply(*m);
        if (until(*m)) return true;
      }
    };

    try {
      for (int op = 0; op < 100; ++op) {
        const auto& who = names[rng() % names.size()];
        const bool present = clients.contains(who);
        if (!present) {
          auto c = std::make_unique<WireClient>();
          c->connect(address);
          clients[who] = std::move(c);
          replicas[who] = RoomReplica{};
          WireMessage join = message(MessageType::Join, Json{{"name", who}, {"role", "peer"}});
          join.room = "room";
          join.from = who;
          clients[who]->send(join);
          if (!pump(who, [](const WireMessage& m) { return m.type == MessageType::Joined; }))
            throw Error(ErrorCode::Io, who + " never saw joined");
          ++joins;
        } else if (rng() % 3 == 0) {
          clients[who]->send(message(MessageType::PeerLeft, Json::object()));
          clients[who]->close();
          clients.erase(who);
          replicas.erase(who);
          const auto deadline = Stopwatch::now() + std::chrono::seconds(5);
          bool gone = false;
          while (!gone && Stopwatch::now() < deadline) {
            gone = !server.hub().inspect("room", [&](const Room& r) { gone = !r.has_member(who); }) || gone;
            if (!gone) std::this_thread::sleep_for(std::chrono::milliseconds(1));
          }
          if (!gone) throw Error(ErrorCode::Io, who + " never left");
          ++leaves;
        } else {
          clients[who]->send(message(MessageType::LayoutRotate, Json{{"direction", rng() % 2 ? "forward" : "backward"}}));
          ++rotations;
        }

        // A self-addressed signal marks the end of everything the server has
        // sent this client so far. The acting client goes first: once its
        // marker returns, its own request has been applied, so every later
        // marker is ordered after the resulting broadcast.
        std::vector<std::string> order;
        if (clients.contains(who)) order.push_back(who);
        for (const auto& [name, client] : clients)
          if (name != who) order.push_back(name);
        for (const auto& name : order) {
          auto& client = clients[name];
          WireMessage marker = message(MessageType::Signal, Json{{"op", op}});
          marker.to = name;
          client->send(marker);
          const bool synced = pump(name, [&, n = name](const WireMessage& m) {
            return m.type == MessageType::Signal && m.from == n && m.payload.value("op", -1) == op;
          });
          if (!synced) throw Error(ErrorCode::Io, name + " did not sync after op " + std::to_string(op));
        }
        std::uint64_t server_hash = 0;
        if (server.hub().inspect("room", [&](const Room& r) { server_hash = r.state_hash(); })) {
          for (const auto& [name, replica] : replicas) {
            ++checks;
            if (replica.state_hash() != server_hash) ++mismatches;
          }
        }
      }
    } catch (const std::exception& e) {
      ok = false;
      outcome_detail = std::string("harness error: ") + e.what() + "; ";
    }
    for (auto& [name, client] : clients) client->close();
    clients.clear();
    server.stop();
    io.join();

    ok = ok && mismatches == 0 && violations == 0 && checks > 0;
    outcome_detail += std::to_string(joins) + " joins, " + std::to_string(leaves) + " leaves, " +
                      std::to_string(rotations) + " rotates; " + std::to_string(checks) + " replica checks, " +
                      std::to_string(mismatches) + " hash mismatches; " + std::to_string(observed.load()) +
                      " server states, " + std::to_string(violations.load()) + " invariant violations";
  }
  fs::remove_all(dir);
  return {ok, outcome_detail};
}

Outcome study_matrix() {
  const fs::path out = fs::temp_directory_path() / ("proxilink_report_" + std::to_string(std::random_device{}()) + ".json");
  const auto r = run({kCli, "analyze", "--log", (kData / "study" / "events.jsonl").string(), "--declarations",
                      (kData / "study" / "declarations.json").string(), "--out", out.string()});
  fs::remove(out);
  if (r.code != 0) return {false, "analyze exited " + std::to_string(r.code) + ": " + r.err};
  const auto summary = nlohmann::json::parse(r.out);
  const bool ok = summary["matrix"] == nlohmann::json::parse("[[7,1,1],[0,8,1],[2,0,7]]") &&
                  summary["diagonal"] == 22 && summary["total"] == 27 && summary["fully_conforming_subjects"] == 7 &&
                  summary["subjects"] == 9;
  return {ok, "matrix " + summary["matrix"].dump() + ", diagonal " + summary["diagonal"].dump() + "/" +
                  summary["total"].dump() + ", fully conforming " + summary["fully_conforming_subjects"].dump() + " of " +
                  summary["subjects"].dump()};
}

Outcome profile_round_trip() {
  const auto bytes = read_file(kData / "default_profile.json");
  const bool identical = calibration::save_profile(calibration::load_profile(bytes)) == bytes;

  const std::vector<std::pair<std::string, std::string>> invalid{
      {"desk",
       R"({"profile_version":1,"slots":[{"id":"desk","label":"Desk","distance_m":0.4,"quad":[[0,0],[0.5,0],[1,0],[0,1]]}]})"},
      {"wall",
       R"({"profile_version":1,"slots":[{"id":"wall","label":"Wall","distance_m":-2,"quad":[[0,0],[1,0],[1,1],[0,1]]}]})"},
      {"bow",
       R"({"profile_version":1,"slots":[{"id":"bow","label":"Bow","distance_m":1,"quad":[[0,0],[1,1],[1,0],[0,1]]}]})"},
  };
  std::size_t rejected = 0;
  for (const auto& [slot, text] : invalid) {
    const auto check = calibration::check_profile(text);
    const bool named = std::any_of(check.issues.begin(), check.issues.end(),
                                   [&](const calibration::ProfileIssue& i) { return i.slot == slot; });
    if (!check.ok() && named) ++rejected;
  }
  return {identical && rejected == invalid.size(),
          std::string("default profile ") + (identical ? "byte-identical" : "DIFFERS") + ", " + std::to_string(rejected) +
              "/" + std::to_string(invalid.size()) + " invalid profiles rejected with slot diagnostics"};
}

}  // namespace

int main() {
  using std::chrono::milliseconds;
  const std::vector<Criterion> criteria{
      {"gain law", milliseconds(1), gain_law},
      {"proxemic zones", milliseconds(1), zones},
      {"homography exactness", milliseconds(2000), homography},
      {"audio law", milliseconds(1000), audio_law},
      {"gesture corpus", milliseconds(1000), gesture_corpus},
      {"protocol convergence", milliseconds(10000), convergence},
      {"study matrix", milliseconds(1000), study_matrix},
      {"profile round-trip", milliseconds(0), profile_round_trip},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome outcome{false, ""};
    const auto start = Stopwatch::now();
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(Stopwatch::now() - start).count();
    const bool in_time = c.budget.count() == 0 || elapsed < static_cast<double>(c.budget.count());
    const bool pass = outcome.ok && in_time;
    if (!pass) ++failed;
    std::string timing = std::to_string(elapsed).substr(0, std::to_string(elapsed).find('.') + 4) + " ms";
    if (c.budget.count() > 0) timing += " < " + std::to_string(c.budget.count()) + " ms";
    std::printf("%s  %-22s %s [%s%s]\n", pass ? "PASS" : "FAIL", c.name.c_str(), outcome.detail.c_str(),
                timing.c_str(), in_time ? "" : ", over budget");
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
