#pragma once

// Whole-session configuration document, validated before anything starts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "gazestream/core.hpp"
#include "gazestream/envelope.hpp"
#include "gazestream/ingest.hpp"
#include "gazestream/ivt.hpp"
#include "gazestream/pupillometry.hpp"
#include "gazestream/replay.hpp"
#include "gazestream/transitions.hpp"

namespace gaze {

struct ServerConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 8765;
    std::size_t queue_capacity = 8192;       // envelopes per subscriber
    double stall_timeout_ms = 2000.0;        // speed=MAX only
};

struct SessionConfig {
    std::filesystem::path input;
    ColumnMap column_map;
    Geometry geometry;
    AoiSet aois;
    IvtConfig ivt;
    PupilConfig pupil;
    StdKind k_std = StdKind::Sample;
    bool exclude_self = false;
    Speed speed = Speed::realtime();
    ServerConfig server;
    StreamSet streams = StreamSet::all();

    /// Parses a config document. Relative paths resolve against `base_dir`.
    /// Throws ConfigError; does not validate cross-field constraints.
    static SessionConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static SessionConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// Checks the whole document; throws ConfigError naming the first problem.
    void validate() const;
};

Geometry geometry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Geometry& g);
IvtConfig ivt_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IvtConfig& c);
PupilConfig pupil_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PupilConfig& c);
/// A positive number or the string "max".
Speed speed_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Speed& s);

}  // namespace gaze
