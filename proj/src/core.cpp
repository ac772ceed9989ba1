#include "gazestream/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gaze {

void Geometry::validate() const {
    auto check = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string("geometry field must be positive: ") + name);
        }
    };
    check(screen_width_px, "screen_width_px");
    check(screen_height_px, "screen_height_px");
    check(screen_width_mm, "screen_width_mm");
    check(screen_height_mm, "screen_height_mm");
    check(viewing_distance_mm, "viewing_distance_mm");
}

std::optional<double> GazeSample::pupil() const {
    if (!valid) {
        return std::nullopt;
    }
    auto usable = [](const std::optional<double>& p) {
        return p && std::isfinite(*p) && *p > 0.0;
    };
    const bool l = usable(pupil_left);
    const bool r = usable(pupil_right);
    if (l && r) {
        return 0.5 * (*pupil_left + *pupil_right);
    }
    if (l) {
        return *pupil_left;
    }
    if (r) {
        return *pupil_right;
    }
    return std::nullopt;
}

double px_to_deg(Point p1, Point p2, const Geometry& geom) {
    const double dx_mm = (p2.x - p1.x) * geom.mm_per_px_x();
    const double dy_mm = (p2.y - p1.y) * geom.mm_per_px_y();
    const double chord_mm = std::hypot(dx_mm, dy_mm);
    const double rad = 2.0 * std::atan2(chord_mm / 2.0, geom.viewing_distance_mm);
    return rad * 180.0 / std::numbers::pi;
}

double angular_velocity(const GazeSample& s_prev, const GazeSample& s_curr, const Geometry& geom) {
    const double dt_ms = s_curr.t - s_prev.t;
    if (!(dt_ms > 0.0)) {
        throw MalformedStream("non-increasing timestamps: " + std::to_string(s_prev.t) + " -> " +
                              std::to_string(s_curr.t));
    }
    return px_to_deg({s_prev.x, s_prev.y}, {s_curr.x, s_curr.y}, geom) / (dt_ms / 1000.0);
}

GazeSample clamp_to_screen(GazeSample s, const Geometry& geom) {
    if (!s.valid) {
        return s;
    }
    const double cx = std::clamp(s.x, 0.0, geom.screen_width_px);
    const double cy = std::clamp(s.y, 0.0, geom.screen_height_px);
    if (cx != s.x || cy != s.y) {
        s.x = cx;
        s.y = cy;
        s.clamped = true;
    }
    return s;
}

}  // namespace gaze
