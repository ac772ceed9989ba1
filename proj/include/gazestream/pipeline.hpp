#pragma once

// One subject's processing chain: sample -> classifier -> measures -> envelopes.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gazestream/envelope.hpp"
#include "gazestream/ivt.hpp"
#include "gazestream/measures.hpp"
#include "gazestream/pupillometry.hpp"
#include "gazestream/session_config.hpp"
#include "gazestream/transitions.hpp"

namespace gaze {

/// Receives each envelope in publication order.
using EnvelopeSink = std::function<void(const Envelope&)>;

class Pipeline {
public:
    Pipeline(const SessionConfig& cfg, std::string session_id, EnvelopeSink sink);

    /// Process one sample, in stream order.
    void step(const GazeSample& raw);
    /// End of input: flush held events.
    void finish();
    /// Fresh measure state, new epoch, every seq back to 0.
    void reset();

    /// Publish on the control stream (ignores the enabled-stream set).
    void publish_control(nlohmann::json payload, double t_ms);

    const std::string& session() const { return session_; }
    std::uint64_t epoch() const { return epoch_; }
    std::uint64_t published(Stream s) const { return seq_[static_cast<std::size_t>(s)]; }
    std::size_t samples_seen() const { return samples_seen_; }
    double last_t() const { return last_t_; }

    /// Counts, final positional stats, entropies and main-sequence fit.
    nlohmann::json summary() const;

private:
    void emit(Stream s, double t_ms, nlohmann::json payload);
    void on_event(const GazeEvent& e);

    SessionConfig cfg_;
    std::string session_;
    EnvelopeSink sink_;
    std::uint64_t epoch_ = 0;
    std::array<std::uint64_t, kStreamCount> seq_{};

    IvtClassifier ivt_;
    Pupillometry pupil_;
    KTracker k_;
    PositionalTracker positional_;
    TransitionMatrix transitions_;
    MainSequence mainseq_;
    std::vector<std::string> labels_;

    std::vector<GazeEvent> events_;
    std::vector<RipaReading> readings_;
    std::size_t samples_seen_ = 0;
    double last_t_ = 0.0;
    std::uint64_t k_count_ = 0;
};

}  // namespace gaze
