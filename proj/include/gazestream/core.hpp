#pragma once

// Shared domain types for the gaze pipeline: screen geometry, raw samples,
// classified oculomotor events, and the pixel -> visual-angle conversion.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace gaze {

// ── Errors ───────────────────────────────────────────────────────────────

/// Invalid user configuration (column map, session config, filter params).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stream violated an ordering precondition (e.g. non-increasing time).
class MalformedStream : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ── Geometry ─────────────────────────────────────────────────────────────

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Screen and viewing setup. All fields must be strictly positive.
struct Geometry {
    double screen_width_px = 1920.0;
    double screen_height_px = 1080.0;
    double screen_width_mm = 531.0;
    double screen_height_mm = 299.0;
    double viewing_distance_mm = 650.0;

    /// Throws ConfigError naming the first non-positive field.
    void validate() const;

    double mm_per_px_x() const { return screen_width_mm / screen_width_px; }
    double mm_per_px_y() const { return screen_height_mm / screen_height_px; }
};

// ── Samples and events ───────────────────────────────────────────────────

struct GazeSample {
    double t = 0.0;  // ms
    double x = 0.0;  // px
    double y = 0.0;  // px
    std::optional<double> pupil_left;
    std::optional<double> pupil_right;
    bool valid = true;
    bool clamped = false;  // valid sample that was pulled back onto the screen

    /// Mean of the usable eyes (finite, > 0) when the sample is valid.
    std::optional<double> pupil() const;
};

struct Fixation {
    std::uint64_t id = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    double duration = 0.0;  // t_end - t_start, ms
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    std::optional<double> mean_pupil;

    Point centroid() const { return {centroid_x, centroid_y}; }
    bool operator==(const Fixation&) const = default;
};

struct Saccade {
    std::uint64_t id = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    double duration = 0.0;       // ms
    double amplitude = 0.0;      // degrees, between bounding fixation centroids
    double peak_velocity = 0.0;  // deg/s
    double mean_velocity = 0.0;  // deg/s

    bool operator==(const Saccade&) const = default;
};

// ── Angular conversions ──────────────────────────────────────────────────

/// Visual angle (degrees) subtended by the segment p1-p2 at the viewing
/// distance, assuming gaze orthogonal to the screen.
double px_to_deg(Point p1, Point p2, const Geometry& geom);

/// Angular speed between two samples in deg/s. Throws MalformedStream when
/// s_curr.t <= s_prev.t.
double angular_velocity(const GazeSample& s_prev, const GazeSample& s_curr, const Geometry& geom);

/// Clamp a valid sample onto the screen rectangle; sets `clamped` when moved.
GazeSample clamp_to_screen(GazeSample s, const Geometry& geom);

}  // namespace gaze
