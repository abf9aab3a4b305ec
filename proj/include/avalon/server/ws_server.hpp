#pragma once

// WebSocket transport: ws://host:port/game/{game_id}. One text frame per
// envelope. Sessions are created on first connection to a game id.
// Everything runs on a single io_context thread.

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <deque>
#include <iostream>
#include <memory>

#include "avalon/server/session.hpp"

namespace avalon {

namespace ws_detail {
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace http = beast::http;
using tcp = asio::ip::tcp;
}  // namespace ws_detail

struct ServerConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  SessionConfig session;  // template; game_id and seed are filled per game
  std::chrono::milliseconds tick{100};
};

// Per-game seeds derive from the configured seed and the game id.
inline std::uint64_t game_seed(std::uint64_t base, std::string_view game_id) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : game_id) h = (h ^ c) * 1099511628211ull;
  return mix_seed(base, h);
}

inline std::optional<std::string> game_id_from_target(std::string_view target) {
  constexpr std::string_view prefix = "/game/";
  if (target.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string id(target.substr(prefix.size()));
  if (auto q = id.find('?'); q != std::string::npos) id.resize(q);
  if (id.empty() || id.size() > 128) return std::nullopt;
  for (unsigned char c : id)
    if (!std::isalnum(c) && c != '-' && c != '_') return std::nullopt;
  return id;
}

class WsServer {
 public:
  explicit WsServer(ServerConfig config)
      : config_(std::move(config)),
        acceptor_(io_, {ws_detail::asio::ip::make_address(config_.address), config_.port}),
        timer_(io_) {}

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  // Blocks until stop().
  void run() {
    accept();
    arm_timer();
    io_.run();
  }

  void stop() {
    ws_detail::asio::post(io_, [this] {
      stopping_ = true;
      boost::system::error_code ec;
      acceptor_.close(ec);
      timer_.cancel();
      for (auto& [id, weak] : live_)
        if (auto c = weak.lock()) c->close();
    });
  }

  Session* find(const std::string& game_id) {
    auto it = sessions_.find(game_id);
    return it == sessions_.end() ? nullptr : it->second.get();
  }

 private:
  class Connection : public std::enable_shared_from_this<Connection> {
   public:
    Connection(WsServer& server, ws_detail::tcp::socket socket) : server_(server), ws_(std::move(socket)) {}

    void start() {
      auto self = shared_from_this();
      ws_detail::http::async_read(ws_.next_layer(), buffer_, request_,
                                  [self](boost::system::error_code ec, std::size_t) { self->on_request(ec); });
    }

    void close() {
      boost::system::error_code ec;
      ws_.next_layer().close(ec);
    }

   private:
    void on_request(boost::system::error_code ec) {
      if (ec) return;
      const auto target = request_.target();
      auto id = game_id_from_target(std::string_view(target.data(), target.size()));
      if (!ws_detail::websocket::is_upgrade(request_) || !id) {
        auto res = std::make_shared<ws_detail::http::response<ws_detail::http::string_body>>(
            ws_detail::http::status::not_found, request_.version());
        res->set(ws_detail::http::field::content_type, "text/plain");
        res->body() = "connect a websocket to /game/{id}\n";
        res->prepare_payload();
        auto self = shared_from_this();
        ws_detail::http::async_write(ws_.next_layer(), *res, [self, res](boost::system::error_code, std::size_t) {
          self->close();
        });
        return;
      }
      session_ = &server_.session_for(*id);
      auto self = shared_from_this();
      ws_.async_accept(request_, [self](boost::system::error_code ec) { self->on_accept(ec); });
    }

    void on_accept(boost::system::error_code ec) {
      if (ec) return;
      std::weak_ptr<Connection> weak = shared_from_this();
      conn_ = session_->connect([weak](const std::string& m) {
        if (auto c = weak.lock()) c->queue(m);
      });
      server_.live_[conn_key()] = weak;
      read();
    }

    std::uint64_t conn_key() const { return reinterpret_cast<std::uintptr_t>(this); }

    void read() {
      auto self = shared_from_this();
      ws_.async_read(in_, [self](boost::system::error_code ec, std::size_t) {
        if (ec) return self->drop();
        const std::string text = ws_detail::beast::buffers_to_string(self->in_.data());
        self->in_.consume(self->in_.size());
        self->session_->handle(self->conn_, text);
        self->read();
      });
    }

    void queue(const std::string& m) {
      out_.push_back(m);
      if (out_.size() == 1) write();
    }

    void write() {
      auto self = shared_from_this();
      ws_.text(true);
      ws_.async_write(ws_detail::asio::buffer(out_.front()), [self](boost::system::error_code ec, std::size_t) {
        if (ec) return self->drop();
        self->out_.pop_front();
        if (!self->out_.empty()) self->write();
      });
    }

    void drop() {
      if (dropped_) return;
      dropped_ = true;
      server_.live_.erase(conn_key());
      if (session_) session_->disconnect(conn_);
      out_.clear();
    }

    WsServer& server_;
    ws_detail::websocket::stream<ws_detail::tcp::socket> ws_;
    ws_detail::beast::flat_buffer buffer_;
    ws_detail::beast::flat_buffer in_;
    ws_detail::http::request<ws_detail::http::string_body> request_;
    std::deque<std::string> out_;
    Session* session_ = nullptr;
    Session::ConnId conn_ = 0;
    bool dropped_ = false;
  };

  Session& session_for(const std::string& id) {
    auto& slot = sessions_[id];
    if (!slot) {
      SessionConfig cfg = config_.session;
      cfg.game_id = id;
      cfg.seed = game_seed(config_.session.seed, id);
      slot = std::make_unique<Session>(std::move(cfg));
    }
    return *slot;
  }

  void accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, ws_detail::tcp::socket socket) {
      if (stopping_) return;
      if (!ec) std::make_shared<Connection>(*this, std::move(socket))->start();
      accept();
    });
  }

  void arm_timer() {
    timer_.expires_after(config_.tick);
    timer_.async_wait([this](boost::system::error_code ec) {
      if (ec || stopping_) return;
      for (auto& [id, s] : sessions_) s->tick();
      arm_timer();
    });
  }

  ServerConfig config_;
  ws_detail::asio::io_context io_;
  ws_detail::tcp::acceptor acceptor_;
  ws_detail::asio::steady_timer timer_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::map<std::uint64_t, std::weak_ptr<Connection>> live_;
  bool stopping_ = false;
};

}  // namespace avalon
