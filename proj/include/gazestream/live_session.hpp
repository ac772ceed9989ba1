#pragma once

// A replayed session driven by its own pipeline thread and steered through
// control commands.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gazestream/hub.hpp"
#include "gazestream/pipeline.hpp"
#include "gazestream/replay.hpp"
#include "gazestream/session_config.hpp"

namespace gaze {

struct LiveOptions {
    bool autostart = false;  // false: wait paused for a resume command
    std::string session_id;
};

class LiveSession {
public:
    LiveSession(SessionConfig cfg, std::vector<GazeSample> samples, Hub& hub, LiveOptions opts);
    ~LiveSession();
    LiveSession(const LiveSession&) = delete;
    LiveSession& operator=(const LiveSession&) = delete;

    void start();
    void stop();

    /// Queues a control command, e.g. {"cmd": "set_speed", "speed": 2}.
    /// Thread-safe; the acknowledgment goes out on the control stream.
    void submit(nlohmann::json command);

    /// Blocks until every sample has been processed (or timeout).
    bool wait_finished(std::chrono::milliseconds timeout);
    bool finished() const { return finished_.load(); }
    /// Last published status (state, speed, position, counts, epoch, drift).
    nlohmann::json status() const;
    const std::string& session_id() const { return id_; }

private:
    using clock = std::chrono::steady_clock;

    void run();
    bool drain_commands();
    void handle(const nlohmann::json& cmd);
    /// Sleeps until `deadline` or a command/stop arrives; true if woken early.
    bool idle_until(clock::time_point deadline);
    void idle();
    double position(clock::time_point now) const;
    void rebase(Speed speed, clock::time_point now);
    void apply_policy();
    nlohmann::json make_status(clock::time_point now) const;
    void ack(const std::string& cmd, bool ok, const std::string& error = {});
    void event(const std::string& name);
    void publish_status(nlohmann::json payload);
    void set_finished(bool v);

    SessionConfig cfg_;
    std::vector<GazeSample> samples_;
    Hub& hub_;
    LiveOptions opts_;
    std::string id_;

    // Pipeline-thread state.
    std::unique_ptr<Pipeline> pipeline_;
    ReplayClock clock_;
    bool paused_ = true;
    std::size_t next_ = 0;
    double drift_max_ = 0.0;
    double drift_sum_ = 0.0;
    std::size_t drift_n_ = 0;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<nlohmann::json> commands_;
    std::atomic<bool> pending_{false};
    bool stop_ = false;
    std::atomic<bool> finished_{false};
    std::condition_variable finished_cv_;
    nlohmann::json status_;
    std::thread thread_;
};

/// Random session identifier (hex).
std::string random_session_id();

}  // namespace gaze
