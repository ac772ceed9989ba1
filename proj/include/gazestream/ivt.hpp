#pragma once

// Streaming velocity-threshold (I-VT) fixation/saccade classification.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "gazestream/core.hpp"

namespace gaze {

struct IvtConfig {
    double velocity_threshold = 30.0;    // deg/s
    double min_fixation_duration = 60.0; // ms
    double max_gap_interpolation = 75.0; // ms
    double min_saccade_amplitude = 0.5;  // deg

    void validate() const;
};

struct GapStarted {
    double t = 0.0;
    bool operator==(const GapStarted&) const = default;
};
struct GapEnded {
    double t = 0.0;
    bool operator==(const GapEnded&) const = default;
};

using GazeEvent = std::variant<Fixation, Saccade, GapStarted, GapEnded>;

/// Time of an event for ordering purposes (end time for fixations/saccades).
double event_time(const GazeEvent& e);

/// Incremental I-VT classifier.
///
/// Each sample is labelled by its angular velocity from the previous sample
/// (the first sample of a run has none and counts as fixating). Runs of equal
/// labels form segments spanning [first sample, first sample of the next
/// segment). Fixation segments shorter than min_fixation_duration fold into
/// the surrounding saccade. A retained fixation is held until the next one
/// closes, because a saccade below min_saccade_amplitude merges both into a
/// single fixation. Saccades are only emitted between two retained fixations.
///
/// Invalid runs whose span (last valid -> next valid) fits within
/// max_gap_interpolation are bridged linearly; longer ones end the run with
/// GapStarted / GapEnded.
class IvtClassifier {
public:
    enum class Phase { Idle, Fixating, Saccading, Gap };

    IvtClassifier(IvtConfig cfg, Geometry geom);

    /// Feed one sample; completed events are appended to `out`.
    /// Throws MalformedStream on non-increasing time.
    void step(const GazeSample& sample, std::vector<GazeEvent>& out);
    std::vector<GazeEvent> step(const GazeSample& sample);

    /// Close the open run at stream end.
    void finish(std::vector<GazeEvent>& out);
    std::vector<GazeEvent> finish();

    void reset();

    Phase phase() const;
    const IvtConfig& config() const { return cfg_; }
    std::uint64_t fixations_emitted() const { return next_fixation_id_; }

private:
    enum class Label { Fix, Sac };

    struct Accum {
        double t_first = 0.0;
        std::size_t n = 0;
        double sum_x = 0.0, sum_y = 0.0;
        double sum_v = 0.0, max_v = 0.0;
        double sum_pupil = 0.0;
        std::size_t n_pupil = 0;

        void add(const Accum& o);
        Point centroid() const;
    };
    struct Segment {
        Label label;
        Accum acc;
    };
    struct HeldFixation {
        Accum acc;
        double t_end = 0.0;
    };
    struct Point3 {
        double t, x, y;
    };

    void feed_point(const Point3& p, std::optional<double> pupil, std::vector<GazeEvent>& out);
    void close_segment(double t_end, std::vector<GazeEvent>& out);
    void on_retained(const Accum& fix, double t_end, std::vector<GazeEvent>& out);
    void close_run(std::vector<GazeEvent>& out);
    void emit_fixation(const HeldFixation& h, std::vector<GazeEvent>& out);

    IvtConfig cfg_;
    Geometry geom_;

    std::optional<double> last_t_;       // any sample, for ordering checks
    std::optional<Point3> prev_;         // last processed point in the current run
    std::vector<double> pending_invalid_;
    bool in_gap_ = false;

    std::optional<Segment> open_;
    std::optional<HeldFixation> held_;
    std::optional<Accum> between_;       // saccade material after held_

    std::uint64_t next_fixation_id_ = 0;
    std::uint64_t next_saccade_id_ = 0;
};

}  // namespace gaze
