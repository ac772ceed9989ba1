#include "gazestream/hub.hpp"

#include <algorithm>

namespace gaze {

Subscriber::Subscriber(std::size_t capacity, Callback on_ready, Callback on_close)
    : capacity_(std::max<std::size_t>(capacity, 1)), on_ready_(std::move(on_ready)), on_close_(std::move(on_close)) {}

void Subscriber::set_filter(StreamSet filter) {
    std::lock_guard lk(mu_);
    filter_ = filter;
}

bool Subscriber::wants(Stream s) const {
    if (s == Stream::control) return true;
    std::lock_guard lk(mu_);
    return filter_.contains(s);
}

Subscriber::Offer Subscriber::offer(const Message& m) {
    {
        std::lock_guard lk(mu_);
        if (closed_) return Offer::Closed;
        if (queue_.size() >= capacity_) return Offer::Full;
        queue_.push_back(m);
    }
    data_.notify_one();
    notify_ready();
    return Offer::Queued;
}

Subscriber::Offer Subscriber::offer_until(const Message& m, std::chrono::steady_clock::time_point deadline) {
    {
        std::unique_lock lk(mu_);
        if (!space_.wait_until(lk, deadline, [&] { return closed_ || queue_.size() < capacity_; })) {
            return Offer::Full;
        }
        if (closed_) return Offer::Closed;
        queue_.push_back(m);
    }
    data_.notify_one();
    notify_ready();
    return Offer::Queued;
}

Message Subscriber::try_pop() {
    Message m;
    {
        std::lock_guard lk(mu_);
        if (queue_.empty()) return nullptr;
        m = std::move(queue_.front());
        queue_.pop_front();
        ++delivered_;
    }
    space_.notify_one();
    return m;
}

Message Subscriber::pop(std::chrono::milliseconds timeout) {
    Message m;
    {
        std::unique_lock lk(mu_);
        if (!data_.wait_for(lk, timeout, [&] { return closed_ || !queue_.empty(); })) return nullptr;
        if (queue_.empty()) return nullptr;
        m = std::move(queue_.front());
        queue_.pop_front();
        ++delivered_;
    }
    space_.notify_one();
    return m;
}

void Subscriber::notify_ready() {
    std::lock_guard lk(cb_mu_);
    if (on_ready_) on_ready_();
}

void Subscriber::close(const std::string& reason) {
    {
        std::lock_guard lk(mu_);
        if (closed_) return;
        closed_ = true;
        reason_ = reason;
    }
    space_.notify_all();
    data_.notify_all();
    std::lock_guard lk(cb_mu_);
    on_ready_ = nullptr;
    if (on_close_) {
        auto cb = std::move(on_close_);
        on_close_ = nullptr;
        cb();
    }
}

bool Subscriber::closed() const {
    std::lock_guard lk(mu_);
    return closed_;
}

std::string Subscriber::close_reason() const {
    std::lock_guard lk(mu_);
    return reason_;
}

std::size_t Subscriber::queued() const {
    std::lock_guard lk(mu_);
    return queue_.size();
}

std::uint64_t Subscriber::delivered() const {
    std::lock_guard lk(mu_);
    return delivered_;
}

// ── Hub ──────────────────────────────────────────────────────────────────

void Hub::add(std::shared_ptr<Subscriber> s) {
    std::lock_guard lk(mu_);
    subs_.push_back(std::move(s));
}

void Hub::remove(const std::shared_ptr<Subscriber>& s) {
    std::lock_guard lk(mu_);
    std::erase(subs_, s);
}

std::size_t Hub::size() const {
    std::lock_guard lk(mu_);
    return subs_.size();
}

void Hub::set_policy(Backpressure p, std::chrono::milliseconds stall_timeout) {
    std::lock_guard lk(mu_);
    policy_ = p;
    stall_timeout_ = stall_timeout;
}

Backpressure Hub::policy() const {
    std::lock_guard lk(mu_);
    return policy_;
}

std::vector<std::shared_ptr<Subscriber>> Hub::snapshot() const {
    std::lock_guard lk(mu_);
    return subs_;
}

void Hub::publish(const Envelope& e) {
    const auto subs = snapshot();
    Backpressure policy;
    std::chrono::milliseconds timeout;
    {
        std::lock_guard lk(mu_);
        policy = policy_;
        timeout = stall_timeout_;
    }
    Message msg;
    std::vector<std::shared_ptr<Subscriber>> dead;
    for (const auto& s : subs) {
        if (!s->wants(e.stream)) continue;
        if (!msg) msg = std::make_shared<const std::string>(serialize(e));
        auto r = s->offer(msg);
        if (r == Subscriber::Offer::Full && policy == Backpressure::Wait) {
            r = s->offer_until(msg, std::chrono::steady_clock::now() + timeout);
        }
        if (r == Subscriber::Offer::Full) {
            s->close("queue overflow");
            dead.push_back(s);
        } else if (r == Subscriber::Offer::Closed) {
            dead.push_back(s);
        }
    }
    if (!dead.empty()) {
        std::lock_guard lk(mu_);
        std::erase_if(subs_, [&](const auto& s) { return std::find(dead.begin(), dead.end(), s) != dead.end(); });
    }
}

void Hub::close_all(const std::string& reason) {
    for (const auto& s : snapshot()) s->close(reason);
    std::lock_guard lk(mu_);
    subs_.clear();
}

}  // namespace gaze
