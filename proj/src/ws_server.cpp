#include "gazestream/ws_server.hpp"

#include <atomic>
#include <deque>
#include <future>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

namespace gaze {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket&& socket, Hub& hub, std::size_t capacity, WsServer::ControlHandler& on_control)
        : ws_(std::move(socket)), hub_(hub), capacity_(capacity), on_control_(on_control) {}

    void run() { ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this())); }

    /// Runs on the io thread: detach from the hub and close the socket.
    void shutdown() {
        if (sub_) {
            hub_.remove(sub_);
            sub_->close("server stopping");
        }
        dropped_ = true;
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(ws_).close();
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.text(true);
        auto exec = ws_.get_executor();
        std::weak_ptr<Connection> weak = shared_from_this();
        sub_ = std::make_shared<Subscriber>(
            capacity_,
            [this, weak, exec] {
                // Collapse bursts of pushes into a single wake-up.
                if (kick_pending_.exchange(true)) return;
                net::post(exec, [weak] {
                    if (auto self = weak.lock()) {
                        self->kick_pending_ = false;
                        self->kick();
                    }
                });
            },
            [weak, exec] {
                net::post(exec, [weak] {
                    if (auto self = weak.lock()) self->drop();
                });
            });
        hub_.add(sub_);
        remote_ = ws_.next_layer().socket().remote_endpoint(ec);
        spdlog::debug("subscriber connected from {}:{}", remote_.address().to_string(), remote_.port());
        do_read();
    }

    void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            finish();
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        handle(text);
        do_read();
    }

    void handle(const std::string& text) {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error&) {
            reply_error("message is not JSON");
            return;
        }
        if (!j.is_object() || (!j.contains("subscribe") && !j.contains("control"))) {
            reply_error("expected {\"subscribe\": [...]} or {\"control\": {...}}");
            return;
        }
        if (j.contains("subscribe")) {
            try {
                sub_->set_filter(StreamSet::from_json(j.at("subscribe")));
            } catch (const ConfigError& e) {
                reply_error(e.what());
            }
        }
        if (j.contains("control") && on_control_) {
            on_control_(j.at("control"));
        }
    }

    void reply_error(const std::string& what) {
        direct_.push_back(std::make_shared<const std::string>(json{{"error", what}}.dump()));
        kick();
    }

    void kick() {
        if (writing_ || dropped_) return;
        Message m;
        if (!direct_.empty()) {
            m = std::move(direct_.front());
            direct_.pop_front();
        } else {
            m = sub_->try_pop();
        }
        if (!m) return;
        writing_ = true;
        current_ = std::move(m);
        ws_.async_write(net::buffer(*current_), beast::bind_front_handler(&Connection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        writing_ = false;
        current_.reset();
        if (ec) {
            finish();
            return;
        }
        kick();
    }

    /// The hub gave up on this subscriber (overflow or shutdown).
    void drop() {
        if (dropped_) return;
        dropped_ = true;
        spdlog::warn("dropping subscriber {}:{}: {}", remote_.address().to_string(), remote_.port(),
                     sub_->close_reason());
        hub_.remove(sub_);
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
        beast::get_lowest_layer(ws_).close();
    }

    void finish() {
        if (sub_) {
            hub_.remove(sub_);
            sub_->close("disconnected");
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    Hub& hub_;
    std::size_t capacity_;
    WsServer::ControlHandler& on_control_;
    std::shared_ptr<Subscriber> sub_;
    std::deque<Message> direct_;
    Message current_;
    bool writing_ = false;
    bool dropped_ = false;
    std::atomic<bool> kick_pending_{false};
    tcp::endpoint remote_;
};

}  // namespace

struct WsServer::Impl {
    Impl(Hub& h, ServerConfig c, ControlHandler cb) : hub(h), cfg(std::move(c)), on_control(std::move(cb)) {}

    void accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != net::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
                if (!acceptor.is_open()) return;
            } else {
                auto c = std::make_shared<Connection>(std::move(socket), hub, cfg.queue_capacity, on_control);
                {
                    std::lock_guard lk(mu);
                    conns.remove_if([](const auto& w) { return w.expired(); });
                    conns.push_back(c);
                }
                c->run();
            }
            accept();
        });
    }

    Hub& hub;
    ServerConfig cfg;
    ControlHandler on_control;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::thread thread;
    std::uint16_t bound_port = 0;
    mutable std::mutex mu;
    std::list<std::weak_ptr<Connection>> conns;
    bool running = false;
};

WsServer::WsServer(Hub& hub, ServerConfig cfg, ControlHandler on_control)
    : impl_(std::make_unique<Impl>(hub, std::move(cfg), std::move(on_control))) {}

WsServer::~WsServer() { stop(); }

void WsServer::start() {
    if (impl_->running) return;
    const auto address = net::ip::make_address(impl_->cfg.host);
    tcp::endpoint ep{address, impl_->cfg.port};
    auto& acc = impl_->acceptor;
    acc.open(ep.protocol());
    acc.set_option(net::socket_base::reuse_address(true));
    acc.bind(ep);
    acc.listen(net::socket_base::max_listen_connections);
    impl_->bound_port = acc.local_endpoint().port();
    impl_->accept();
    impl_->running = true;
    impl_->thread = std::thread([this] { impl_->ioc.run(); });
    spdlog::info("listening on ws://{}:{}", impl_->cfg.host, impl_->bound_port);
}

std::uint16_t WsServer::port() const { return impl_->bound_port; }

std::size_t WsServer::connections() const {
    std::lock_guard lk(impl_->mu);
    std::size_t n = 0;
    for (const auto& w : impl_->conns) n += !w.expired();
    return n;
}

void WsServer::stop() {
    if (!impl_->running) return;
    impl_->running = false;
    std::promise<void> closed;
    net::post(impl_->ioc, [this, &closed] {
        beast::error_code ec;
        impl_->acceptor.close(ec);
        std::list<std::weak_ptr<Connection>> conns;
        {
            std::lock_guard lk(impl_->mu);
            conns = impl_->conns;
        }
        for (const auto& w : conns) {
            if (auto c = w.lock()) c->shutdown();
        }
        closed.set_value();
    });
    closed.get_future().wait();
    impl_->ioc.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace gaze
