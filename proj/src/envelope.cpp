#include "gazestream/envelope.hpp"

namespace gaze {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kStreamCount> kNames = {
    "samples", "fixations", "saccades", "kcoef", "ripa", "positional", "transitions", "mainseq", "control",
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary(const std::optional<Summary>& s) {
    if (!s) return nullptr;
    return {{"count", s->count}, {"mean", s->mean}, {"std", opt(s->stddev)}, {"min", s->min}, {"max", s->max}};
}

json reading(const PupilReading& r) { return {{"current", opt(r.current)}, {"mean", opt(r.mean)}}; }

}  // namespace

std::string_view stream_name(Stream s) { return kNames.at(static_cast<std::size_t>(s)); }

Stream stream_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return static_cast<Stream>(i);
    }
    throw ConfigError("unknown stream: " + std::string(name));
}

const std::array<Stream, kStreamCount>& all_streams() {
    static const std::array<Stream, kStreamCount> all = [] {
        std::array<Stream, kStreamCount> a{};
        for (std::size_t i = 0; i < kStreamCount; ++i) a[i] = static_cast<Stream>(i);
        return a;
    }();
    return all;
}

StreamSet StreamSet::all() {
    StreamSet s;
    s.bits_.set();
    return s;
}

StreamSet StreamSet::measures() {
    StreamSet s = all();
    s.erase(Stream::control);
    return s;
}

StreamSet StreamSet::from_json(const json& names) {
    if (!names.is_array()) {
        throw ConfigError("stream list must be an array of names");
    }
    StreamSet s;
    for (const auto& n : names) {
        if (!n.is_string()) throw ConfigError("stream names must be strings");
        s.insert(stream_from_name(n.get<std::string>()));
    }
    return s;
}

json StreamSet::to_json() const {
    json out = json::array();
    for (Stream s : all_streams()) {
        if (contains(s)) out.push_back(stream_name(s));
    }
    return out;
}

// ── Envelope ─────────────────────────────────────────────────────────────

json to_json(const Envelope& e) {
    return {{"v", e.v},       {"session", e.session}, {"epoch", e.epoch},    {"stream", stream_name(e.stream)},
            {"seq", e.seq},   {"t_ms", e.t_ms},       {"payload", e.payload}};
}

Envelope envelope_from_json(const json& j) {
    try {
        Envelope e;
        e.v = j.at("v").get<int>();
        if (e.v != kProtocolVersion) {
            throw MalformedStream("unsupported protocol version " + std::to_string(e.v));
        }
        e.session = j.at("session").get<std::string>();
        for (const char* key : {"epoch", "seq"}) {
            if (!j.at(key).is_number_unsigned()) {
                throw MalformedStream(std::string("bad envelope: ") + key + " must be a non-negative integer");
            }
        }
        e.epoch = j.at("epoch").get<std::uint64_t>();
        e.stream = stream_from_name(j.at("stream").get<std::string>());
        e.seq = j.at("seq").get<std::uint64_t>();
        e.t_ms = j.at("t_ms").get<double>();
        e.payload = j.at("payload");
        return e;
    } catch (const json::exception& ex) {
        throw MalformedStream(std::string("bad envelope: ") + ex.what());
    } catch (const ConfigError& ex) {
        throw MalformedStream(std::string("bad envelope: ") + ex.what());
    }
}

std::string serialize(const Envelope& e) {
    // Invalid UTF-8 in a label is a caller bug; dump() throws rather than drops.
    return to_json(e).dump();
}

Envelope parse_envelope(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw MalformedStream(std::string("bad envelope: ") + ex.what());
    }
    return envelope_from_json(j);
}

// ── Payloads ─────────────────────────────────────────────────────────────

json sample_payload(const GazeSample& s) {
    return {{"t", s.t},
            {"x", s.x},
            {"y", s.y},
            {"pupil_left", opt(s.pupil_left)},
            {"pupil_right", opt(s.pupil_right)},
            {"valid", s.valid},
            {"clamped", s.clamped}};
}

json fixation_payload(const Fixation& f, std::optional<std::size_t> aoi, const std::optional<std::string>& label) {
    return {{"id", f.id},
            {"t_start", f.t_start},
            {"t_end", f.t_end},
            {"duration", f.duration},
            {"centroid_x", f.centroid_x},
            {"centroid_y", f.centroid_y},
            {"mean_pupil", opt(f.mean_pupil)},
            {"aoi", aoi ? json(*aoi) : json(nullptr)},
            {"aoi_label", label ? json(*label) : json(nullptr)}};
}

json saccade_payload(const Saccade& s) {
    return {{"id", s.id},
            {"t_start", s.t_start},
            {"t_end", s.t_end},
            {"duration", s.duration},
            {"amplitude", s.amplitude},
            {"peak_velocity", s.peak_velocity},
            {"mean_velocity", s.mean_velocity}};
}

json kcoef_payload(const KSample& k) {
    return {{"fixation_id", k.fixation_id}, {"t", k.t},           {"k", k.k},
            {"d_i", k.d_i},                 {"a_next", k.a_next}, {"pupil_at_fixation", opt(k.pupil_at_fixation)}};
}

json ripa_payload(const RipaReading& r) {
    return {{"t", r.t},         {"ripa", r.ripa},   {"pupil", r.pupil},
            {"pcpd", opt(r.pcpd)}, {"activity", r.activity}, {"scale", r.scale}};
}

json positional_payload(const PositionalStats& p) {
    return {{"fixation_count", p.fixation_count},
            {"saccade_count", p.saccade_count},
            {"fixation_duration", summary(p.fixation_duration)},
            {"saccade_amplitude", summary(p.saccade_amplitude)},
            {"pupil_left", reading(p.pupil_left)},
            {"pupil_right", reading(p.pupil_right)}};
}

json transitions_payload(const TransitionSnapshot& t) {
    return {{"n", t.n},
            {"labels", t.labels},
            {"counts", t.counts},
            {"probs", t.probs},
            {"row_visited", t.row_visited},
            {"pi", t.pi},
            {"fixations", t.fixations},
            {"transitions", t.transitions},
            {"H_stationary", opt(t.entropy.stationary)},
            {"H_transition", opt(t.entropy.transition)}};
}

json mainseq_payload(const MainSequenceFit& m) {
    return {{"n_saccades", m.n_saccades},
            {"velocity_fit", {{"c", m.c}, {"alpha", m.alpha}, {"residual_std", m.velocity_residual_std}}},
            {"duration_fit", {{"d0", m.d0}, {"m", m.m}, {"residual_std", m.duration_residual_std}}},
            {"outliers", m.outliers}};
}

}  // namespace gaze
