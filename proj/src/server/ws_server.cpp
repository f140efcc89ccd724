#include "swarm/server/ws_server.hpp"

#include <atomic>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "swarm/server/console.hpp"
#include "swarm/server/mission.hpp"

namespace swarm::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace {

/// Snapshots queued beyond this are dropped for that client.
constexpr std::size_t kMaxBacklog = 4;

}  // namespace

struct ConsoleServer::Impl {
  struct Session : std::enable_shared_from_this<Session> {
    Session(tcp::socket s, Impl& owner, std::uint64_t id) : ws(std::move(s)), owner(owner), id(id) {}

    websocket::stream<tcp::socket> ws;
    Impl& owner;
    std::uint64_t id;
    beast::flat_buffer buffer;
    std::deque<std::shared_ptr<const std::string>> outbox;
    bool open = false;

    void start() {
      auto self = shared_from_this();
      ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws.async_accept([self](beast::error_code ec) {
        if (ec) return self->close(ec);
        self->open = true;
        self->owner.attach(self);
        self->send(self->owner.hello);
        self->read();
      });
    }

    void read() {
      auto self = shared_from_this();
      ws.async_read(buffer, [self](beast::error_code ec, std::size_t) {
        if (ec) return self->close(ec);
        std::string text = beast::buffers_to_string(self->buffer.data());
        self->buffer.consume(self->buffer.size());
        self->owner.enqueue(self->id, std::move(text));
        self->read();
      });
    }

    // I/O thread only.
    void send(std::shared_ptr<const std::string> text, bool droppable = false) {
      if (!open) return;
      if (droppable && outbox.size() >= kMaxBacklog) return;
      outbox.push_back(std::move(text));
      if (outbox.size() == 1) write();
    }

    void write() {
      auto self = shared_from_this();
      ws.text(true);
      ws.async_write(asio::buffer(*outbox.front()), [self](beast::error_code ec, std::size_t) {
        if (ec) return self->close(ec);
        self->outbox.pop_front();
        if (!self->outbox.empty()) self->write();
      });
    }

    void close(beast::error_code ec) {
      if (ec && ec != websocket::error::closed && ec != asio::error::operation_aborted) {
        spdlog::debug("console client {}: {}", id, ec.message());
      }
      open = false;
      owner.detach(id);
    }
  };

  Impl(std::uint16_t port, std::string address) : acceptor(io), address(std::move(address)), requested(port) {}

  asio::io_context io;
  tcp::acceptor acceptor;
  std::string address;
  std::uint16_t requested;
  std::thread thread;
  std::shared_ptr<const std::string> hello;
  std::map<std::uint64_t, std::shared_ptr<Session>> sessions;  // I/O thread
  std::uint64_t next_id = 1;
  std::atomic<std::size_t> client_count{0};

  std::mutex mu;
  std::deque<std::pair<std::uint64_t, std::string>> inbound;

  void attach(const std::shared_ptr<Session>& s) {
    sessions[s->id] = s;
    client_count = sessions.size();
  }
  void detach(std::uint64_t id) {
    sessions.erase(id);
    client_count = sessions.size();
  }
  void enqueue(std::uint64_t id, std::string text) {
    std::lock_guard<std::mutex> lock(mu);
    inbound.emplace_back(id, std::move(text));
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<Session>(std::move(socket), *this, next_id++)->start();
      accept();
    });
  }

  void reply(std::uint64_t id, std::shared_ptr<const std::string> text) {
    asio::post(io, [this, id, text = std::move(text)] {
      auto it = sessions.find(id);
      if (it != sessions.end()) it->second->send(text);
    });
  }
};

ConsoleServer::ConsoleServer(std::uint16_t port, std::string address)
    : impl_(std::make_unique<Impl>(port, std::move(address))) {}

ConsoleServer::~ConsoleServer() { stop(); }

void ConsoleServer::start(json hello) {
  impl_->hello = std::make_shared<const std::string>(hello.dump());
  tcp::endpoint ep(asio::ip::make_address(impl_->address), impl_->requested);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void ConsoleServer::stop() {
  if (!impl_->thread.joinable()) return;
  asio::post(impl_->io, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    for (auto& [id, s] : impl_->sessions) {
      s->open = false;
      s->ws.next_layer().close(ec);
    }
    impl_->sessions.clear();
    impl_->client_count = 0;
    impl_->io.stop();
  });
  impl_->thread.join();
}

std::uint16_t ConsoleServer::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t ConsoleServer::clients() const { return impl_->client_count.load(); }

std::size_t ConsoleServer::drain(Mission& mission) {
  std::deque<std::pair<std::uint64_t, std::string>> batch;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    batch.swap(impl_->inbound);
  }
  std::size_t accepted = 0;
  for (auto& [id, text] : batch) {
    try {
      mission.submit(json::parse(text));
      ++accepted;
    } catch (const std::exception& e) {
      json err = {{"type", "error"}, {"message", e.what()}};
      impl_->reply(id, std::make_shared<const std::string>(err.dump()));
    }
  }
  return accepted;
}

void ConsoleServer::publish(const json& snapshot) {
  auto text = std::make_shared<const std::string>(snapshot.dump());
  asio::post(impl_->io, [this, text] {
    for (auto& [id, s] : impl_->sessions) s->send(text, true);
  });
}

}  // namespace swarm::server
