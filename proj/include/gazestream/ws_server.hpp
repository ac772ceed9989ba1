#pragma once

// WebSocket front end: every connection becomes a hub subscriber.
//
// Client -> server text messages:
//   {"subscribe": ["ripa", "kcoef"]}    replace this connection's filter
//   {"control": {"cmd": "pause"}}       forwarded to the control handler
// Server -> client: one envelope per text message; {"error": "..."} for a
// rejected client message.

#include <cstdint>
#include <functional>
#include <memory>

#include "json.hpp"

#include "gazestream/hub.hpp"
#include "gazestream/session_config.hpp"

namespace gaze {

class WsServer {
public:
    using ControlHandler = std::function<void(nlohmann::json)>;

    WsServer(Hub& hub, ServerConfig cfg, ControlHandler on_control);
    ~WsServer();
    WsServer(const WsServer&) = delete;
    WsServer& operator=(const WsServer&) = delete;

    /// Binds and starts the network thread. Throws std::system_error if the
    /// address is unavailable. Port 0 picks a free port.
    void start();
    /// Bound port (valid after start).
    std::uint16_t port() const;
    void stop();
    std::size_t connections() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace gaze
