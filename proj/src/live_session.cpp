#include "gazestream/live_session.hpp"

#include <algorithm>
#include <random>

#include <spdlog/spdlog.h>

namespace gaze {

using nlohmann::json;

std::string random_session_id() {
    std::random_device rd;
    std::uniform_int_distribution<std::uint64_t> d;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d(rd)));
    return buf;
}

LiveSession::LiveSession(SessionConfig cfg, std::vector<GazeSample> samples, Hub& hub, LiveOptions opts)
    : cfg_(std::move(cfg)),
      samples_(std::move(samples)),
      hub_(hub),
      opts_(std::move(opts)),
      id_(opts_.session_id.empty() ? random_session_id() : opts_.session_id),
      clock_(cfg_.speed) {
    if (samples_.empty()) {
        throw EmptyStream("session has no samples");
    }
    pipeline_ = std::make_unique<Pipeline>(cfg_, id_, [this](const Envelope& e) { hub_.publish(e); });
}

LiveSession::~LiveSession() { stop(); }

void LiveSession::start() {
    if (thread_.joinable()) return;
    thread_ = std::thread([this] { run(); });
}

void LiveSession::stop() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
        pending_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void LiveSession::submit(json command) {
    {
        std::lock_guard lk(mu_);
        commands_.push_back(std::move(command));
        pending_ = true;
    }
    cv_.notify_all();
}

bool LiveSession::wait_finished(std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    return finished_cv_.wait_for(lk, timeout, [&] { return finished_.load(); });
}

json LiveSession::status() const {
    std::lock_guard lk(mu_);
    return status_;
}

// ── Pipeline thread ──────────────────────────────────────────────────────

double LiveSession::position(clock::time_point now) const {
    if (next_ == 0) return samples_.front().t;
    const double last = samples_[next_ - 1].t;
    if (clock_.speed().is_max()) return last;
    const double upper = next_ < samples_.size() ? samples_[next_].t : last;
    return std::clamp(clock_.position(now), last, upper);
}

void LiveSession::rebase(Speed speed, clock::time_point now) {
    const double pos = position(now);
    clock_ = ReplayClock(speed);
    clock_.start(now, pos);
    if (paused_) clock_.pause(now);
}

void LiveSession::apply_policy() {
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(cfg_.server.stall_timeout_ms));
    hub_.set_policy(clock_.speed().is_max() ? Backpressure::Wait : Backpressure::Disconnect, timeout);
}

json LiveSession::make_status(clock::time_point now) const {
    const Speed sp = clock_.speed();
    const char* state = finished_ ? "finished" : paused_ ? "paused" : "running";
    return {{"state", state},
            {"speed", sp.is_max() ? json("max") : json(sp.factor())},
            {"position_ms", position(now)},
            {"emitted", next_},
            {"total", samples_.size()},
            {"epoch", pipeline_->epoch()},
            {"drift", {{"max_ms", drift_max_}, {"mean_ms", drift_n_ ? drift_sum_ / static_cast<double>(drift_n_) : 0.0}}}};
}

void LiveSession::ack(const std::string& cmd, bool ok, const std::string& error) {
    json payload = {{"ack", cmd.empty() ? json(nullptr) : json(cmd)}, {"ok", ok}};
    if (!ok) payload["error"] = error;
    if (cmd == "reset" && ok) payload["event"] = "reset";
    publish_status(std::move(payload));
}

void LiveSession::event(const std::string& name) {
    publish_status({{"event", name}});
}

void LiveSession::publish_status(json payload) {
    const auto now = clock::now();
    json st = make_status(now);
    payload["status"] = st;
    {
        std::lock_guard lk(mu_);
        status_ = st;
    }
    pipeline_->publish_control(std::move(payload), position(now));
}

void LiveSession::handle(const json& command) {
    std::string cmd;
    if (command.is_string()) {
        cmd = command.get<std::string>();
    } else if (command.is_object() && command.contains("cmd") && command.at("cmd").is_string()) {
        cmd = command.at("cmd").get<std::string>();
    } else {
        ack("", false, "control message needs a \"cmd\" string");
        return;
    }
    const auto now = clock::now();
    if (cmd == "pause") {
        if (!paused_) {
            clock_.pause(now);
            paused_ = true;
        }
        ack(cmd, true);
    } else if (cmd == "resume") {
        if (paused_) {
            paused_ = false;
            rebase(clock_.speed(), now);
        }
        ack(cmd, true);
    } else if (cmd == "set_speed") {
        if (!command.is_object() || !command.contains("speed")) {
            ack(cmd, false, "set_speed needs a \"speed\" value");
            return;
        }
        try {
            const Speed sp = speed_from_json(command.at("speed"));
            rebase(sp, now);
            apply_policy();
            ack(cmd, true);
        } catch (const ConfigError& e) {
            ack(cmd, false, e.what());
        }
    } else if (cmd == "reset") {
        pipeline_->reset();
        next_ = 0;
        set_finished(false);
        drift_max_ = drift_sum_ = 0.0;
        drift_n_ = 0;
        clock_ = ReplayClock(clock_.speed());
        clock_.start(now, samples_.front().t);
        if (paused_) clock_.pause(now);
        ack(cmd, true);  // first control record of the new epoch
    } else if (cmd == "status") {
        ack(cmd, true);
    } else {
        ack(cmd, false, "unknown command: " + cmd);
    }
}

void LiveSession::set_finished(bool v) {
    std::lock_guard lk(mu_);
    finished_ = v;
}

bool LiveSession::drain_commands() {
    if (!pending_.load(std::memory_order_acquire)) return false;
    std::deque<json> batch;
    bool stop = false;
    {
        std::lock_guard lk(mu_);
        batch.swap(commands_);
        stop = stop_;
        pending_ = false;
    }
    for (const auto& c : batch) handle(c);
    return stop;
}

bool LiveSession::idle_until(clock::time_point deadline) {
    std::unique_lock lk(mu_);
    return cv_.wait_until(lk, deadline, [&] { return pending_.load(); });
}

void LiveSession::idle() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return pending_.load(); });
}

void LiveSession::run() {
    try {
        const auto now = clock::now();
        clock_.start(now, samples_.front().t);
        paused_ = !opts_.autostart;
        if (paused_) clock_.pause(now);
        apply_policy();
        event("started");

        while (true) {
            if (drain_commands()) break;
            if (next_ == samples_.size()) {
                if (!finished_) {
                    pipeline_->finish();
                    set_finished(true);
                    event("finished");
                    finished_cv_.notify_all();
                }
                idle();
                continue;
            }
            if (paused_) {
                idle();
                continue;
            }
            const GazeSample& s = samples_[next_];
            if (!clock_.speed().is_max()) {
                const auto target = clock_.target(s.t);
                if (clock::now() < target && idle_until(target)) {
                    continue;  // a command arrived; re-evaluate against the new clock
                }
                const double late = std::chrono::duration<double, std::milli>(clock::now() - target).count();
                drift_max_ = std::max(drift_max_, late);
                drift_sum_ += late;
                ++drift_n_;
            }
            pipeline_->step(s);
            ++next_;
        }
    } catch (const std::exception& e) {
        spdlog::error("session {} aborted: {}", id_, e.what());
        set_finished(true);
        finished_cv_.notify_all();
    }
}

}  // namespace gaze
