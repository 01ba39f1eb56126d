#include "server.hpp"

#include <deque>
#include <fstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "error.hpp"

namespace proxilink::session {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxFrameBytes = 1 << 20;

class WsSession : public Connection, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, SessionHub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void start(http::request<http::string_body> request) {
    ws_.text(true);
    ws_.read_message_max(kMaxFrameBytes);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->id_ = self->hub_.attach(self);
      self->attached_ = true;
      self->read();
    });
  }

  void send(std::string frame) override {
    asio::post(ws_.get_executor(), [self = shared_from_this(), frame = std::move(frame)]() mutable {
      if (self->closed_) return;
      self->outbox_.push_back(std::move(frame));
      if (!self->writing_) self->write();
    });
  }

  void close() override {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (!self->writing_) self->finish();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->drop();
      const std::string frame = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->hub_.receive(self->id_, frame);
      if (!self->closed_) self->read();
    });
  }

  void write() {
    writing_ = true;
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) return self->drop();
      self->outbox_.pop_front();
      if (!self->outbox_.empty())
        self->write();
      else if (self->closing_)
        self->finish();
    });
  }

  void finish() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) { self->drop(); });
  }

  void drop() {
    closed_ = true;
    outbox_.clear();
    if (attached_) {
      attached_ = false;
      hub_.detach(id_);
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  SessionHub& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  SessionHub::ConnectionId id_ = 0;
  bool attached_ = false;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

std::string issues_json(const std::vector<calibration::ProfileIssue>& issues) {
  Json list = Json::array();
  for (const auto& i : issues) list.push_back({{"slot", i.slot}, {"message", i.message}});
  return Json{{"issues", std::move(list)}}.dump();
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, SessionHub& hub, std::filesystem::path profile_path)
      : stream_(std::move(socket)), hub_(hub), profile_path_(std::move(profile_path)) {}

  void start() { read(); }

 private:
  void read() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (websocket::is_upgrade(self->request_)) {
        stream_expiry_off(self->stream_);
        std::make_shared<WsSession>(self->stream_.release_socket(), self->hub_)->start(std::move(self->request_));
        return;
      }
      self->respond();
    });
  }

  static void stream_expiry_off(beast::tcp_stream& stream) { stream.expires_never(); }

  void respond() {
    auto response = std::make_shared<http::response<http::string_body>>(http::status::ok, request_.version());
    response->set(http::field::content_type, "application/json");
    response->keep_alive(request_.keep_alive());

    if (request_.target() != "/profile") {
      response->result(http::status::not_found);
      response->body() = R"({"error":"not found"})";
    } else if (request_.method() == http::verb::get) {
      response->body() = calibration::save_profile(hub_.profile());
    } else if (request_.method() == http::verb::put) {
      auto check = calibration::check_profile(request_.body());
      if (!check.ok()) {
        response->result(http::status::unprocessable_entity);
        response->body() = issues_json(check.issues);
      } else {
        const auto canonical = calibration::save_profile(*check.profile);
        std::ofstream out(profile_path_, std::ios::binary | std::ios::trunc);
        out << canonical;
        if (!out) {
          response->result(http::status::internal_server_error);
          response->body() = R"({"error":"cannot write calibration profile"})";
        } else {
          hub_.replace_profile(std::move(*check.profile));
          response->body() = canonical;
        }
      }
    } else {
      response->result(http::status::method_not_allowed);
      response->body() = R"({"error":"method not allowed"})";
    }
    response->prepare_payload();

    http::async_write(stream_, *response,
                      [self = shared_from_this(), response](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (response->keep_alive())
                          self->read();
                        else
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                      });
  }

  beast::tcp_stream stream_;
  SessionHub& hub_;
  std::filesystem::path profile_path_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

}  // namespace

struct Server::Impl {
  explicit Impl(ServerConfig cfg) : config(std::move(cfg)) {
    if (config.event_log) {
      log_file.open(*config.event_log, std::ios::app);
      if (!log_file) throw Error(ErrorCode::Configuration, "config field 'event_log': cannot open " + config.event_log->string());
      event_log = std::make_unique<EventLog>(log_file);
    }
    hub = std::make_unique<SessionHub>(config.hub, wall_clock_seconds, event_log.get());
  }

  void accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(socket), *hub, config.profile_path)->start();
      accept();
    });
  }

  void schedule_sweep() {
    sweep_timer.expires_after(std::chrono::seconds(1));
    sweep_timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      hub->sweep();
      schedule_sweep();
    });
  }

  // Declared before the hub: the hub holds sessions whose sockets must be
  // destroyed while the io_context still exists.
  ServerConfig config;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  asio::steady_timer sweep_timer{ioc};
  std::ofstream log_file;
  std::unique_ptr<EventLog> event_log;
  std::unique_ptr<SessionHub> hub;
};

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() = default;

SessionHub& Server::hub() { return *impl_->hub; }

void Server::listen() {
  auto& im = *impl_;
  beast::error_code ec;
  tcp::resolver resolver(im.ioc);
  auto endpoints = resolver.resolve(im.config.host, std::to_string(im.config.port), ec);
  if (ec || endpoints.empty())
    throw Error(ErrorCode::Io, "cannot resolve listen address '" + im.config.host + "': " + ec.message());
  const tcp::endpoint endpoint = endpoints.begin()->endpoint();

  const auto fail = [&](const char* what) {
    throw Error(ErrorCode::Io, std::string("cannot ") + what + " " + im.config.host + ":" +
                                   std::to_string(im.config.port) + ": " + ec.message());
  };
  im.acceptor.open(endpoint.protocol(), ec);
  if (ec) fail("open");
  im.acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  im.acceptor.bind(endpoint, ec);
  if (ec) fail("bind");
  im.acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) fail("listen on");
}

std::string Server::address() const {
  const auto endpoint = impl_->acceptor.local_endpoint();
  return endpoint.address().to_string() + ":" + std::to_string(endpoint.port());
}

void Server::run() {
  impl_->accept();
  impl_->schedule_sweep();
  impl_->ioc.run();
}

void Server::stop() { impl_->ioc.stop(); }

}  // namespace proxilink::session
