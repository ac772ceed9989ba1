#include "gazestream/replay.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace gaze {

namespace {

using fms = std::chrono::duration<double, std::milli>;

}  // namespace

Speed Speed::times(double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw ConfigError("replay speed must be positive");
    }
    return Speed(factor, false);
}

void ReplayClock::start(clock::time_point wall, double stream_ms) {
    epoch_wall_ = wall;
    epoch_stream_ = stream_ms;
    paused_at_ = stream_ms;
}

ReplayClock::clock::time_point ReplayClock::target(double t_ms) const {
    if (speed_.is_max()) {
        return epoch_wall_;
    }
    const auto offset = fms((t_ms - epoch_stream_) / speed_.factor());
    return epoch_wall_ + std::chrono::duration_cast<clock::duration>(offset);
}

double ReplayClock::position(clock::time_point now) const {
    if (paused_) {
        return paused_at_;
    }
    if (speed_.is_max()) {
        return epoch_stream_;
    }
    return epoch_stream_ + fms(now - epoch_wall_).count() * speed_.factor();
}

void ReplayClock::pause(clock::time_point now) {
    if (paused_) {
        return;
    }
    paused_at_ = position(now);
    paused_ = true;
}

void ReplayClock::resume(clock::time_point now) {
    if (!paused_) {
        return;
    }
    paused_ = false;
    epoch_wall_ = now;
    epoch_stream_ = paused_at_;
}

void ReplayClock::set_speed(Speed speed, clock::time_point now) {
    if (paused_) {
        speed_ = speed;
        return;
    }
    const double pos = position(now);
    speed_ = speed;
    epoch_wall_ = now;
    epoch_stream_ = pos;
}

ReplayReport replay(std::span<const GazeSample> samples, ReplayClock clock, const SampleSink& sink) {
    ReplayReport report;
    if (samples.empty()) {
        return report;
    }
    clock.start(ReplayClock::clock::now(), samples.front().t);
    double drift_sum = 0.0;
    for (const auto& s : samples) {
        if (!clock.speed().is_max()) {
            const auto target = clock.target(s.t);
            std::this_thread::sleep_until(target);
            const double late = std::max(0.0, fms(ReplayClock::clock::now() - target).count());
            report.max_drift_ms = std::max(report.max_drift_ms, late);
            drift_sum += late;
        }
        if (!sink(s)) {
            report.aborted = true;
            break;
        }
        ++report.emitted;
    }
    if (report.emitted > 0) {
        report.mean_drift_ms = drift_sum / static_cast<double>(report.emitted);
    }
    return report;
}

}  // namespace gaze
