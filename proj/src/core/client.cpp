#include "client.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "error.hpp"

namespace proxilink::session {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct WireClient::Impl {
  asio::io_context ioc;
  websocket::stream<beast::tcp_stream> ws{ioc};
  std::thread worker;
  beast::flat_buffer buffer;
  std::deque<std::string> outbox;
  bool writing = false;
  bool closing = false;
  bool close_started = false;

  mutable std::mutex mutex;
  std::condition_variable ready;
  std::deque<std::string> inbox;
  bool open = false;

  void read() {
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      std::lock_guard lock(mutex);
      if (ec) {
        open = false;
        ready.notify_all();
        return;
      }
      inbox.push_back(beast::buffers_to_string(buffer.data()));
      buffer.consume(buffer.size());
      ready.notify_all();
      asio::post(ioc, [this] { read(); });
    });
  }

  void write() {
    writing = true;
    ws.async_write(asio::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      writing = false;
      if (ec) {
        outbox.clear();
        if (closing) begin_close();
        return;
      }
      outbox.pop_front();
      if (!outbox.empty())
        write();
      else if (closing)
        begin_close();
    });
  }

  // Pending frames are flushed before the close handshake.
  void begin_close() {
    if (close_started) return;
    close_started = true;
    auto shutdown = [this] {
      beast::error_code ignored;
      beast::get_lowest_layer(ws).socket().shutdown(tcp::socket::shutdown_both, ignored);
      beast::get_lowest_layer(ws).socket().close(ignored);
    };
    if (!ws.is_open()) return shutdown();
    beast::get_lowest_layer(ws).expires_after(std::chrono::seconds(2));
    ws.async_close(websocket::close_code::normal, [shutdown](beast::error_code) { shutdown(); });
  }
};

WireClient::WireClient() : impl_(std::make_unique<Impl>()) {}

WireClient::~WireClient() { close(); }

void WireClient::connect(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::Io, "address must be host:port, got '" + address + "'");
  const auto host = address.substr(0, colon);
  const auto port = address.substr(colon + 1);

  auto& im = *impl_;
  try {
    tcp::resolver resolver(im.ioc);
    auto endpoints = resolver.resolve(host, port);
    beast::get_lowest_layer(im.ws).expires_after(std::chrono::seconds(5));
    beast::get_lowest_layer(im.ws).connect(endpoints);
    beast::get_lowest_layer(im.ws).expires_never();
    im.ws.text(true);
    im.ws.read_message_max(1 << 20);
    im.ws.handshake(host + ":" + port, "/");
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::Io, "cannot reach server at " + address + ": " + e.code().message());
  }
  {
    std::lock_guard lock(im.mutex);
    im.open = true;
  }
  im.read();
  im.worker = std::thread([&im] { im.ioc.run(); });
}

void WireClient::send(const WireMessage& msg) { send_raw(msg.encode()); }

void WireClient::send_raw(std::string frame) {
  auto& im = *impl_;
  asio::post(im.ioc, [&im, frame = std::move(frame)]() mutable {
    im.outbox.push_back(std::move(frame));
    if (!im.writing) im.write();
  });
}

std::optional<WireMessage> WireClient::receive(std::chrono::milliseconds timeout) {
  auto& im = *impl_;
  std::unique_lock lock(im.mutex);
  im.ready.wait_for(lock, timeout, [&] { return !im.inbox.empty() || !im.open; });
  if (im.inbox.empty()) return std::nullopt;
  std::string frame = std::move(im.inbox.front());
  im.inbox.pop_front();
  lock.unlock();
  return decode(frame);
}

bool WireClient::connected() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->open;
}

void WireClient::close() {
  auto& im = *impl_;
  if (!im.worker.joinable()) return;
  asio::post(im.ioc, [&im] {
    im.closing = true;
    if (!im.writing) im.begin_close();
  });
  im.worker.join();
}

}  // namespace proxilink::session
