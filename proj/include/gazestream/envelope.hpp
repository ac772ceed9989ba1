#pragma once

// Wire records: one JSON object per message, one stream per measure kind.

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gazestream/core.hpp"
#include "gazestream/measures.hpp"
#include "gazestream/pupillometry.hpp"
#include "gazestream/transitions.hpp"

namespace gaze {

inline constexpr int kProtocolVersion = 1;

enum class Stream : std::uint8_t {
    samples,
    fixations,
    saccades,
    kcoef,
    ripa,
    positional,
    transitions,
    mainseq,
    control,
};
inline constexpr std::size_t kStreamCount = 9;

std::string_view stream_name(Stream s);
/// Throws ConfigError for an unknown name.
Stream stream_from_name(std::string_view name);
const std::array<Stream, kStreamCount>& all_streams();

/// A set of streams; default-constructed sets are empty.
class StreamSet {
public:
    StreamSet() = default;
    static StreamSet all();
    static StreamSet measures();  // every stream but control
    static StreamSet from_json(const nlohmann::json& names);

    void insert(Stream s) { bits_.set(static_cast<std::size_t>(s)); }
    void erase(Stream s) { bits_.reset(static_cast<std::size_t>(s)); }
    bool contains(Stream s) const { return bits_.test(static_cast<std::size_t>(s)); }
    bool empty() const { return bits_.none(); }
    nlohmann::json to_json() const;
    bool operator==(const StreamSet&) const = default;

private:
    std::bitset<kStreamCount> bits_;
};

struct Envelope {
    int v = kProtocolVersion;
    std::string session;
    std::uint64_t epoch = 0;
    Stream stream = Stream::control;
    std::uint64_t seq = 0;
    double t_ms = 0.0;
    nlohmann::json payload;

    bool operator==(const Envelope&) const = default;
};

nlohmann::json to_json(const Envelope& e);
/// Throws MalformedStream on a record that is not a valid envelope.
Envelope envelope_from_json(const nlohmann::json& j);
std::string serialize(const Envelope& e);
Envelope parse_envelope(std::string_view text);

// ── Payloads ─────────────────────────────────────────────────────────────

nlohmann::json sample_payload(const GazeSample& s);
nlohmann::json fixation_payload(const Fixation& f, std::optional<std::size_t> aoi,
                                const std::optional<std::string>& aoi_label);
nlohmann::json saccade_payload(const Saccade& s);
nlohmann::json kcoef_payload(const KSample& k);
nlohmann::json ripa_payload(const RipaReading& r);
nlohmann::json positional_payload(const PositionalStats& p);
nlohmann::json transitions_payload(const TransitionSnapshot& t);
nlohmann::json mainseq_payload(const MainSequenceFit& m);

}  // namespace gaze
