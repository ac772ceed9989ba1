#pragma once

// Per-subject event measures: ambient/focal coefficient K, positional
// statistics, and main-sequence fits.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gazestream/core.hpp"
#include "gazestream/running_stats.hpp"

namespace gaze {

// ── Coefficient K ────────────────────────────────────────────────────────

struct KSample {
    std::uint64_t fixation_id = 0;
    double t = 0.0;  // end of the following saccade
    double k = 0.0;
    double d_i = 0.0;
    double a_next = 0.0;
    std::optional<double> pupil_at_fixation;
};

/// K = (d_i - mean_d) / std_d - (a_next - mean_a) / std_a, scored against
/// stats that already include d_i and a_next. nullopt (not ready) while
/// either std is undefined or zero.
std::optional<KSample> coefficient_k(const Fixation& fixation, const Saccade& next_saccade,
                                     const RunningStats& stats_d, const RunningStats& stats_a,
                                     StdKind kind = StdKind::Sample);

/// Pairs every fixation with the saccade that immediately follows it.
class KTracker {
public:
    explicit KTracker(StdKind kind = StdKind::Sample) : kind_(kind) {}

    void on_fixation(const Fixation& f);
    std::optional<KSample> on_saccade(const Saccade& s);
    /// A gap breaks the fixation -> saccade pairing.
    void on_gap() { pending_.reset(); }
    void reset();

    const RunningStats& durations() const { return stats_d_; }
    const RunningStats& amplitudes() const { return stats_a_; }
    StdKind std_kind() const { return kind_; }

private:
    StdKind kind_;
    RunningStats stats_d_;
    RunningStats stats_a_;
    std::optional<Fixation> pending_;
};

// ── Positional statistics ────────────────────────────────────────────────

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    std::optional<double> stddev;
    double min = 0.0;
    double max = 0.0;
};

struct PupilReading {
    std::optional<double> current;
    std::optional<double> mean;
};

struct PositionalStats {
    std::size_t fixation_count = 0;
    std::size_t saccade_count = 0;
    std::optional<Summary> fixation_duration;
    std::optional<Summary> saccade_amplitude;
    PupilReading pupil_left;
    PupilReading pupil_right;
};

class PositionalTracker {
public:
    PositionalStats update(const Fixation& f);
    PositionalStats update(const Saccade& s);
    /// Tracks per-eye pupil readings; does not change event aggregates.
    void observe(const GazeSample& s);
    PositionalStats snapshot() const;
    void reset() { *this = PositionalTracker{}; }

private:
    struct Extremes {
        RunningStats stats;
        double min = 0.0;
        double max = 0.0;
        void push(double v);
        std::optional<Summary> summary() const;
    };
    struct Eye {
        RunningStats stats;
        std::optional<double> current;
        void push(const std::optional<double>& v);
    };

    Extremes fixation_duration_;
    Extremes saccade_amplitude_;
    Eye left_;
    Eye right_;
};

// ── Main sequence ────────────────────────────────────────────────────────

struct MainSequenceFit {
    std::size_t n_saccades = 0;
    double c = 0.0;      // V = c * A^alpha
    double alpha = 0.0;
    double velocity_residual_std = 0.0;  // log space
    double d0 = 0.0;     // D = d0 + m * A
    double m = 0.0;
    double duration_residual_std = 0.0;  // ms
    std::vector<std::uint64_t> outliers;
};

/// Incremental least-squares fits over saccades with positive amplitude
/// and peak velocity. Fits need at least kMinSaccades such saccades.
class MainSequence {
public:
    static constexpr std::size_t kMinSaccades = 8;
    static constexpr double kOutlierSigma = 3.0;

    void add(const Saccade& s);
    std::optional<MainSequenceFit> fit() const;
    std::size_t size() const { return points_.size(); }
    void reset() { *this = MainSequence{}; }

private:
    /// Co-moment accumulator for simple linear regression.
    struct Regression {
        std::size_t n = 0;
        double mean_x = 0.0, mean_y = 0.0;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        void push(double x, double y);
        double slope() const { return sxy / sxx; }
        double intercept() const { return mean_y - slope() * mean_x; }
        double residual_std() const;
    };
    struct Point {
        std::uint64_t id;
        double log_a;
        double log_v;
    };

    Regression velocity_;
    Regression duration_;
    std::vector<Point> points_;
};

std::optional<MainSequenceFit> main_sequence_fit(std::span<const Saccade> saccades);

}  // namespace gaze
