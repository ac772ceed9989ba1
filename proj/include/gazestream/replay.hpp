#pragma once

// Re-streaming of recorded samples with wall-clock timing.

#include <chrono>
#include <cstddef>
#include <functional>
#include <span>

#include "gazestream/core.hpp"

namespace gaze {

/// Replay speed multiplier, or the MAX sentinel (no sleeping at all).
class Speed {
public:
    static Speed times(double factor);  // throws ConfigError unless factor > 0
    static Speed max() { return Speed(0.0, true); }
    static Speed realtime() { return Speed(1.0, false); }

    bool is_max() const { return max_; }
    double factor() const { return factor_; }

    bool operator==(const Speed&) const = default;

private:
    Speed(double f, bool m) : factor_(f), max_(m) {}
    double factor_;
    bool max_;
};

/// Maps stream time onto wall time: target(t) = epoch_wall + (t - epoch_stream) / speed.
///
/// Pausing freezes the stream position; resuming and speed changes rebase
/// the epochs at the current position so already-emitted samples keep their
/// timing.
class ReplayClock {
public:
    using clock = std::chrono::steady_clock;

    explicit ReplayClock(Speed speed = Speed::realtime()) : speed_(speed) {}

    void start(clock::time_point wall, double stream_ms);

    clock::time_point target(double t_ms) const;
    /// Stream time (ms) corresponding to wall time `now`.
    double position(clock::time_point now) const;

    void pause(clock::time_point now);
    void resume(clock::time_point now);
    void set_speed(Speed speed, clock::time_point now);

    bool paused() const { return paused_; }
    Speed speed() const { return speed_; }
    clock::time_point epoch_wall() const { return epoch_wall_; }
    double epoch_stream() const { return epoch_stream_; }

private:
    Speed speed_;
    clock::time_point epoch_wall_{};
    double epoch_stream_ = 0.0;
    bool paused_ = false;
    double paused_at_ = 0.0;
};

struct ReplayReport {
    std::size_t emitted = 0;
    double max_drift_ms = 0.0;   // worst lateness vs target wall time
    double mean_drift_ms = 0.0;
    bool aborted = false;        // sink rejected a sample
};

/// Receives one sample; returning false aborts the replay.
using SampleSink = std::function<bool(const GazeSample&)>;

/// Deliver samples to the sink in order, each no earlier than its target
/// wall time. The clock is started at the first sample when called.
ReplayReport replay(std::span<const GazeSample> samples, ReplayClock clock, const SampleSink& sink);

}  // namespace gaze
