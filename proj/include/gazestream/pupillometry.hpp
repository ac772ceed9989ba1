#pragma once

// Pupil-signal repair, RIPA cognitive-load index and percentage change of
// pupil diameter.

#include <cstddef>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include <boost/accumulators/accumulators.hpp>
#include <boost/accumulators/statistics/p_square_quantile.hpp>
#include <boost/accumulators/statistics/stats.hpp>

#include "gazestream/core.hpp"
#include "gazestream/savitzky_golay.hpp"

namespace gaze {

/// Streaming median: P² estimate once five values are seen, exact before.
class RunningMedian {
public:
    RunningMedian();
    void push(double v);
    std::optional<double> value() const;
    std::size_t count() const { return n_; }

private:
    using Acc = boost::accumulators::accumulator_set<
        double, boost::accumulators::stats<boost::accumulators::tag::p_square_quantile>>;
    Acc acc_;
    std::vector<double> first_;  // exact values until the estimator is primed
    std::size_t n_ = 0;
};

struct PupilConfig {
    std::size_t sg_window = 11;
    std::size_t sg_order = 2;
    double gap_ms = 200.0;       // longest pupil dropout that is interpolated
    double baseline_ms = 1000.0; // PCPD baseline window
    double epsilon = 1e-6;       // scale floor

    void validate() const;
};

// ── Preprocessing ────────────────────────────────────────────────────────

struct PupilPoint {
    double t = 0.0;
    double value = 0.0;
    bool interpolated = false;
};
struct GapBreak {
    double t = 0.0;  // last usable value before the dropout
};
using PupilEvent = std::variant<PupilPoint, GapBreak>;

/// Repairs short pupil dropouts by linear interpolation once the run closes;
/// longer dropouts produce a GapBreak. Both eyes -> mean, one eye -> that eye.
class PupilPreprocessor {
public:
    explicit PupilPreprocessor(double max_gap_ms) : max_gap_ms_(max_gap_ms) {}

    void step(const GazeSample& s, std::vector<PupilEvent>& out);
    /// Same, for a value already reduced across eyes (nullopt = unusable).
    void step(double t, std::optional<double> pupil, std::vector<PupilEvent>& out);
    void reset();

private:
    double max_gap_ms_;
    std::optional<PupilPoint> last_;
    std::vector<double> pending_;
    bool broken_ = false;
};

// ── RIPA ─────────────────────────────────────────────────────────────────

/// x / (1 + x) with x = m / scale; in [0, 1), 0.5 exactly at m == scale.
double ripa_index(double m, double scale);

/// Index of pupillary activity on a short SG differentiating filter,
/// normalised against the subject's running median activity.
class RipaState {
public:
    explicit RipaState(const PupilConfig& cfg);

    /// nullopt while the filter window is filling (warm-up).
    std::optional<double> step(double t, double pupil);
    /// Dropout: the window restarts; the running scale is kept.
    void on_gap();
    void reset();

    /// Primes the activity scale with a prior value.
    void seed_scale(double scale);
    double scale() const;
    /// Last activity m = |d pupil / dt| (per second); 0 before the first score.
    double last_activity() const { return last_m_; }
    std::optional<double> sample_interval_s() const;

private:
    PupilConfig cfg_;
    SgFilter deriv_;
    std::deque<double> window_;
    std::optional<double> last_t_;
    RunningMedian intervals_ms_;
    RunningMedian activity_;
    double last_m_ = 0.0;
};

/// 100 * (pupil - baseline) / baseline; nullopt without a positive baseline.
std::optional<double> pcpd(double pupil, std::optional<double> baseline);

/// Mean pupil over the first baseline_ms after the first usable value.
class PupilBaseline {
public:
    explicit PupilBaseline(double window_ms) : window_ms_(window_ms) {}
    void push(double t, double pupil);
    std::optional<double> value() const { return value_; }
    void reset();

private:
    double window_ms_;
    std::optional<double> t0_;
    double sum_ = 0.0;
    std::size_t n_ = 0;
    std::optional<double> value_;
};

struct RipaReading {
    double t = 0.0;
    double pupil = 0.0;
    double ripa = 0.0;
    double activity = 0.0;  // m, pupil units per second
    double scale = 0.0;
    std::optional<double> pcpd;
};

/// Per-subject chain: preprocess -> baseline -> RIPA.
class Pupillometry {
public:
    explicit Pupillometry(const PupilConfig& cfg);
    void step(const GazeSample& s, std::vector<RipaReading>& out);
    void reset();

    const RipaState& ripa() const { return ripa_; }
    const PupilBaseline& baseline() const { return baseline_; }

private:
    PupilConfig cfg_;
    PupilPreprocessor pre_;
    RipaState ripa_;
    PupilBaseline baseline_;
    std::vector<PupilEvent> scratch_;
};

}  // namespace gaze
