#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "client.hpp"
#include "config.hpp"
#include "error.hpp"
#include "server.hpp"

using namespace proxilink;
using namespace proxilink::session;
namespace fs = std::filesystem;
namespace http = boost::beast::http;

namespace {

const fs::path kData = PROXILINK_DATA_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("proxilink_server_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Server on an ephemeral port, serving from a background thread.
struct LiveServer {
  TempDir dir;
  std::unique_ptr<Server> server;
  std::thread thread;

  LiveServer() {
    fs::copy_file(kData / "default_profile.json", dir.path / "profile.json");
    std::ofstream(dir.path / "server.json")
        << R"({"listen":"127.0.0.1:0","calibration_profile":"profile.json","event_log":"events.jsonl"})";
    server = std::make_unique<Server>(load_server_config(dir.path / "server.json"));
    server->listen();
    thread = std::thread([this] { server->run(); });
  }
  ~LiveServer() {
    server->stop();
    thread.join();
  }
  std::string address() const { return server->address(); }
};

std::pair<int, std::string> http_request(const std::string& address, http::verb verb, const std::string& target,
                                         const std::string& body = "") {
  boost::asio::io_context ioc;
  boost::asio::ip::tcp::resolver resolver(ioc);
  boost::beast::tcp_stream stream(ioc);
  const auto colon = address.rfind(':');
  stream.connect(resolver.resolve(address.substr(0, colon), address.substr(colon + 1)));
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, address);
  req.body() = body;
  req.prepare_payload();
  http::write(stream, req);
  boost::beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  boost::beast::error_code ec;
  stream.socket().shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
  return {static_cast<int>(res.result_int()), res.body()};
}

WireMessage join_message(const std::string& room, const std::string& who, const std::string& role = "peer") {
  WireMessage m;
  m.type = MessageType::Join;
  m.room = room;
  m.from = who;
  m.payload = Json{{"name", who}, {"role", role}};
  return m;
}

std::optional<WireMessage> receive_type(WireClient& c, MessageType type) {
  for (;;) {
    auto m = c.receive(std::chrono::seconds(5));
    if (!m || m->type == type) return m;
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

TEST_CASE("clients join over WebSocket and see rotations") {
  LiveServer live;
  WireClient a, b;
  a.connect(live.address());
  b.connect(live.address());
  a.send(join_message("room", "a"));
  REQUIRE(receive_type(a, MessageType::Joined));
  b.send(join_message("room", "b"));
  REQUIRE(receive_type(b, MessageType::Joined));
  REQUIRE(receive_type(a, MessageType::PeerJoined));

  WireMessage rotate;
  rotate.type = MessageType::LayoutRotate;
  rotate.payload = Json{{"direction", "forward"}};
  b.send(rotate);
  std::optional<WireMessage> state;
  do {
    state = receive_type(a, MessageType::LayoutState);
    REQUIRE(state);
  } while (state->payload["cause"]["op"] != "rotate");
  CHECK(state->payload["assignment"]["a"] == "middle");
  CHECK(state->payload["gains"]["b"] == 1.0);
  a.close();
  b.close();
}

TEST_CASE("a 256 KB signal blob is relayed byte for byte") {
  LiveServer live;
  WireClient a, b;
  a.connect(live.address());
  b.connect(live.address());
  a.send(join_message("room", "a"));
  b.send(join_message("room", "b"));
  REQUIRE(receive_type(a, MessageType::Joined));
  REQUIRE(receive_type(b, MessageType::Joined));

  std::mt19937 rng(1);
  std::string blob(256 * 1024, ' ');
  for (auto& ch : blob) ch = static_cast<char>('!' + rng() % 90);
  WireMessage signal;
  signal.type = MessageType::Signal;
  signal.to = "b";
  signal.payload = blob;
  a.send(signal);
  const auto got = receive_type(b, MessageType::Signal);
  REQUIRE(got);
  CHECK(got->from == "a");
  REQUIRE(got->payload.is_string());
  CHECK(fnv1a(got->payload.get<std::string>()) == fnv1a(blob));
  a.close();
  b.close();
}

TEST_CASE("bad protocol version gets an error and the socket is closed") {
  LiveServer live;
  WireClient c;
  c.connect(live.address());
  c.send_raw(R"({"v":7,"type":"join","room":"r","from":"x","payload":{}})");
  const auto err = c.receive(std::chrono::seconds(5));
  REQUIRE(err);
  CHECK(err->payload["code"] == "bad-version");
  CHECK_FALSE(c.receive(std::chrono::seconds(5)).has_value());
}

TEST_CASE("GET /profile serves the canonical profile") {
  LiveServer live;
  const auto [status, body] = http_request(live.address(), http::verb::get, "/profile");
  CHECK(status == 200);
  CHECK(body == read(kData / "default_profile.json"));
  CHECK(http_request(live.address(), http::verb::get, "/nowhere").first == 404);
  CHECK(http_request(live.address(), http::verb::delete_, "/profile").first == 405);
}

TEST_CASE("PUT /profile validates, persists and adopts") {
  LiveServer live;
  const std::string bad =
      R"({"profile_version":1,"slots":[{"id":"desk","label":"Desk","distance_m":0.4,"quad":[[0,0],[0.5,0],[1,0],[0,1]]}]})";
  const auto [bad_status, bad_body] = http_request(live.address(), http::verb::put, "/profile", bad);
  CHECK(bad_status == 422);
  CHECK(bad_body.find("desk") != std::string::npos);

  const std::string good =
      R"({"profile_version":1,"slots":[{"id":"desk","label":"Desk","distance_m":0.4,"quad":[[0,0],[1,0],[1,1],[0,1]]},)"
      R"({"id":"wall","label":"Wall","distance_m":2.5,"quad":[[0.1,0.1],[0.3,0.1],[0.3,0.3],[0.1,0.3]]}]})";
  const auto [status, body] = http_request(live.address(), http::verb::put, "/profile", good);
  CHECK(status == 200);
  CHECK(read(live.dir.path / "profile.json") == body);
  CHECK(http_request(live.address(), http::verb::get, "/profile").second == body);
}

TEST_CASE("config errors name the field") {
  TempDir dir;
  auto error_for = [&](const std::string& text) -> std::string {
    try {
      parse_server_config(text, dir.path);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Configuration);
      return e.what();
    }
    return "";
  };
  CHECK(error_for(R"({"listen":"127.0.0.1:0"})").find("calibration") != std::string::npos);
  CHECK(error_for(R"({"calibration_profile":"missing.json"})").find("calibration") != std::string::npos);
  fs::copy_file(kData / "default_profile.json", dir.path / "p.json");
  CHECK(error_for(R"({"calibration_profile":"p.json","listen":"nope"})").find("listen") != std::string::npos);
  CHECK(error_for(R"({"calibration_profile":"p.json","room_cap":0})").find("room_cap") != std::string::npos);
  CHECK(error_for(R"({"calibration_profile":"p.json","gain_policy":{"mode":"rank-table","rank_table":[1.0,0.5]}})")
            .find("gain_policy") != std::string::npos);
  CHECK(error_for(R"({"calibration_profile":"p.json"})").empty());
}

TEST_CASE("binding a taken port fails with Io") {
  LiveServer live;
  TempDir dir;
  fs::copy_file(kData / "default_profile.json", dir.path / "p.json");
  auto config = parse_server_config(R"({"calibration_profile":"p.json"})", dir.path);
  const auto addr = live.address();
  config.port = static_cast<std::uint16_t>(std::stoi(addr.substr(addr.rfind(':') + 1)));
  Server second(config);
  try {
    second.listen();
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("connecting to a closed port fails with Io") {
  WireClient c;
  CHECK_THROWS_AS(c.connect("127.0.0.1:1"), Error);
}
