#pragma once

// Fan-out of serialized envelopes to subscribers with bounded queues.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gazestream/envelope.hpp"

namespace gaze {

using Message = std::shared_ptr<const std::string>;

/// One consumer. The hub pushes; a transport (or a test) pops.
class Subscriber {
public:
    using Callback = std::function<void()>;

    /// `on_ready` fires after each push (outside the lock); `on_close` once
    /// when the hub disconnects the subscriber.
    explicit Subscriber(std::size_t capacity, Callback on_ready = {}, Callback on_close = {});

    void set_filter(StreamSet filter);
    bool wants(Stream s) const;

    /// Non-blocking pop; nullptr when empty.
    Message try_pop();
    /// Waits up to `timeout`; nullptr on timeout or when closed and drained.
    Message pop(std::chrono::milliseconds timeout);

    /// Idempotent. After it returns no callback runs again.
    void close(const std::string& reason);
    bool closed() const;
    std::string close_reason() const;
    std::size_t queued() const;
    std::size_t capacity() const { return capacity_; }
    std::uint64_t delivered() const;

private:
    friend class Hub;
    enum class Offer { Queued, Full, Closed };
    Offer offer(const Message& m);
    /// Waits for space until `deadline`.
    Offer offer_until(const Message& m, std::chrono::steady_clock::time_point deadline);

    void notify_ready();

    const std::size_t capacity_;
    std::mutex cb_mu_;  // guards the callbacks; close() clears them
    Callback on_ready_;
    Callback on_close_;
    mutable std::mutex mu_;
    std::condition_variable space_;
    std::condition_variable data_;
    std::deque<Message> queue_;
    StreamSet filter_ = StreamSet::all();
    bool closed_ = false;
    std::string reason_;
    std::uint64_t delivered_ = 0;
};

enum class Backpressure {
    Disconnect,  // a full queue drops the subscriber immediately
    Wait,        // wait up to the stall timeout for space, then drop
};

class Hub {
public:
    void add(std::shared_ptr<Subscriber> s);
    void remove(const std::shared_ptr<Subscriber>& s);
    std::size_t size() const;

    void set_policy(Backpressure p, std::chrono::milliseconds stall_timeout);
    Backpressure policy() const;

    /// Serializes once and offers to every subscriber whose filter matches.
    /// Control envelopes go to every subscriber. Never blocks longer than the
    /// stall timeout per stalled subscriber.
    void publish(const Envelope& e);
    /// Closes every subscriber.
    void close_all(const std::string& reason);

private:
    std::vector<std::shared_ptr<Subscriber>> snapshot() const;

    mutable std::mutex mu_;
    std::vector<std::shared_ptr<Subscriber>> subs_;
    Backpressure policy_ = Backpressure::Disconnect;
    std::chrono::milliseconds stall_timeout_{2000};
};

}  // namespace gaze
