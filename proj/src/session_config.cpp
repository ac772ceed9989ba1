#include "gazestream/session_config.hpp"

#include <fstream>
#include <initializer_list>

namespace gaze {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key in " + where + ": \"" + key + "\"");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

Geometry geometry_from_json(const json& j) {
    check_keys(j, {"screen_width_px", "screen_height_px", "screen_width_mm", "screen_height_mm", "viewing_distance_mm"},
               "geometry");
    Geometry g;
    read(j, "screen_width_px", g.screen_width_px, "geometry");
    read(j, "screen_height_px", g.screen_height_px, "geometry");
    read(j, "screen_width_mm", g.screen_width_mm, "geometry");
    read(j, "screen_height_mm", g.screen_height_mm, "geometry");
    read(j, "viewing_distance_mm", g.viewing_distance_mm, "geometry");
    return g;
}

json to_json(const Geometry& g) {
    return {{"screen_width_px", g.screen_width_px},   {"screen_height_px", g.screen_height_px},
            {"screen_width_mm", g.screen_width_mm},   {"screen_height_mm", g.screen_height_mm},
            {"viewing_distance_mm", g.viewing_distance_mm}};
}

IvtConfig ivt_from_json(const json& j) {
    check_keys(j, {"velocity_threshold", "min_fixation_duration", "max_gap_interpolation", "min_saccade_amplitude"},
               "ivt");
    IvtConfig c;
    read(j, "velocity_threshold", c.velocity_threshold, "ivt");
    read(j, "min_fixation_duration", c.min_fixation_duration, "ivt");
    read(j, "max_gap_interpolation", c.max_gap_interpolation, "ivt");
    read(j, "min_saccade_amplitude", c.min_saccade_amplitude, "ivt");
    return c;
}

json to_json(const IvtConfig& c) {
    return {{"velocity_threshold", c.velocity_threshold},
            {"min_fixation_duration", c.min_fixation_duration},
            {"max_gap_interpolation", c.max_gap_interpolation},
            {"min_saccade_amplitude", c.min_saccade_amplitude}};
}

PupilConfig pupil_from_json(const json& j) {
    check_keys(j, {"sg_window", "sg_order", "gap_ms", "baseline_ms", "epsilon"}, "pupil");
    PupilConfig c;
    read(j, "sg_window", c.sg_window, "pupil");
    read(j, "sg_order", c.sg_order, "pupil");
    read(j, "gap_ms", c.gap_ms, "pupil");
    read(j, "baseline_ms", c.baseline_ms, "pupil");
    read(j, "epsilon", c.epsilon, "pupil");
    return c;
}

json to_json(const PupilConfig& c) {
    return {{"sg_window", c.sg_window},
            {"sg_order", c.sg_order},
            {"gap_ms", c.gap_ms},
            {"baseline_ms", c.baseline_ms},
            {"epsilon", c.epsilon}};
}

Speed speed_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "max" || s == "MAX") return Speed::max();
        try {
            std::size_t used = 0;
            const double f = std::stod(s, &used);
            if (used == s.size()) return Speed::times(f);
        } catch (const std::logic_error&) {
        }
        throw ConfigError("speed must be a positive number or \"max\", got \"" + s + "\"");
    }
    if (j.is_number()) {
        return Speed::times(j.get<double>());
    }
    throw ConfigError("speed must be a positive number or \"max\"");
}

json to_json(const Speed& s) {
    if (s.is_max()) return "max";
    return s.factor();
}

SessionConfig SessionConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    check_keys(j,
               {"input", "column_map", "geometry", "aois", "ivt", "pupil", "measures", "transitions", "replay",
                "server", "streams"},
               "config");
    SessionConfig c;
    if (!j.contains("input") || !j.at("input").is_string()) {
        throw ConfigError("config.input must name the recording file");
    }
    c.input = resolve(base_dir, j.at("input").get<std::string>());

    if (!j.contains("column_map")) {
        throw ConfigError("config.column_map is required (object, preset name object, or file path)");
    }
    const auto& cm = j.at("column_map");
    c.column_map = cm.is_string() ? ColumnMap::from_json(load_json(resolve(base_dir, cm.get<std::string>())))
                                  : ColumnMap::from_json(cm);

    if (j.contains("geometry")) c.geometry = geometry_from_json(j.at("geometry"));

    if (j.contains("aois")) {
        const auto& a = j.at("aois");
        if (a.is_string()) {
            c.aois = AoiSet::from_json(load_json(resolve(base_dir, a.get<std::string>())));
        } else if (a.is_object() && a.contains("grid")) {
            check_keys(a, {"grid"}, "aois");
            const auto& g = a.at("grid");
            check_keys(g, {"rows", "cols"}, "aois.grid");
            c.aois = AoiSet::grid(g.value("rows", std::size_t{1}), g.value("cols", std::size_t{1}), c.geometry);
        } else {
            try {
                c.aois = AoiSet::from_json(a);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("aois: ") + e.what());
            }
        }
    }

    if (j.contains("ivt")) c.ivt = ivt_from_json(j.at("ivt"));
    if (j.contains("pupil")) c.pupil = pupil_from_json(j.at("pupil"));
    if (j.contains("measures")) {
        const auto& m = j.at("measures");
        check_keys(m, {"population_std"}, "measures");
        bool pop = false;
        read(m, "population_std", pop, "measures");
        c.k_std = pop ? StdKind::Population : StdKind::Sample;
    }
    if (j.contains("transitions")) {
        const auto& t = j.at("transitions");
        check_keys(t, {"exclude_self"}, "transitions");
        read(t, "exclude_self", c.exclude_self, "transitions");
    }
    if (j.contains("replay")) {
        const auto& r = j.at("replay");
        check_keys(r, {"speed"}, "replay");
        if (r.contains("speed")) c.speed = speed_from_json(r.at("speed"));
    }
    if (j.contains("server")) {
        const auto& s = j.at("server");
        check_keys(s, {"host", "port", "queue_capacity", "stall_timeout_ms"}, "server");
        read(s, "host", c.server.host, "server");
        read(s, "port", c.server.port, "server");
        read(s, "queue_capacity", c.server.queue_capacity, "server");
        read(s, "stall_timeout_ms", c.server.stall_timeout_ms, "server");
    }
    if (j.contains("streams")) c.streams = StreamSet::from_json(j.at("streams"));
    return c;
}

SessionConfig SessionConfig::load(const std::filesystem::path& path) {
    return from_json(load_json(path), path.parent_path());
}

json SessionConfig::to_json() const {
    return {{"input", input.string()},
            {"column_map", column_map.to_json()},
            {"geometry", gaze::to_json(geometry)},
            {"aois", aois.to_json()},
            {"ivt", gaze::to_json(ivt)},
            {"pupil", gaze::to_json(pupil)},
            {"measures", {{"population_std", k_std == StdKind::Population}}},
            {"transitions", {{"exclude_self", exclude_self}}},
            {"replay", {{"speed", gaze::to_json(speed)}}},
            {"server",
             {{"host", server.host},
              {"port", server.port},
              {"queue_capacity", server.queue_capacity},
              {"stall_timeout_ms", server.stall_timeout_ms}}},
            {"streams", streams.to_json()}};
}

void SessionConfig::validate() const {
    if (input.empty()) {
        throw ConfigError("config.input is empty");
    }
    std::error_code ec;
    if (!std::filesystem::is_regular_file(input, ec)) {
        throw ConfigError("config.input does not exist or is not a file: " + input.string());
    }
    geometry.validate();
    ivt.validate();
    pupil.validate();
    aois.validate(geometry);
    if (column_map.gaze_unit == GazeUnit::Normalized && geometry.screen_width_px <= 0) {
        throw ConfigError("normalized gaze needs a screen geometry");
    }
    if (server.queue_capacity == 0) {
        throw ConfigError("server.queue_capacity must be >= 1");
    }
    if (!(server.stall_timeout_ms > 0.0)) {
        throw ConfigError("server.stall_timeout_ms must be > 0");
    }
    if (streams.empty()) {
        throw ConfigError("config.streams enables no stream");
    }
}

}  // namespace gaze
