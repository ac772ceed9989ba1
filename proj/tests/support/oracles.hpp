#pragma once

// Test-only reference implementations. These work on whole arrays and share
// no state machinery with the streaming code they check.

#include <optional>
#include <random>
#include <vector>

#include "gazestream/core.hpp"
#include "gazestream/ivt.hpp"
#include "gazestream/measures.hpp"

namespace gaze::testing {

/// Offline two-pass I-VT: pass 1 splits the array into gap-free runs and
/// interpolates short dropouts; pass 2 labels velocities and merges segments.
std::vector<GazeEvent> batch_ivt(const std::vector<GazeSample>& samples, const IvtConfig& cfg,
                                 const Geometry& geom);

/// Runs the streaming classifier over a whole array.
std::vector<GazeEvent> stream_ivt(const std::vector<GazeSample>& samples, const IvtConfig& cfg,
                                  const Geometry& geom);

/// Event sequences equal: same kinds and ids, identical times, metrics within rel_tol.
bool same_events(const std::vector<GazeEvent>& a, const std::vector<GazeEvent>& b, double rel_tol,
                 std::string* why = nullptr);

/// Two-pass mean and sample/population std.
struct NaiveStats {
    double mean = 0.0;
    double sd = 0.0;
};
NaiveStats naive_stats(const std::vector<double>& v, StdKind kind = StdKind::Sample);

struct OracleK {
    std::uint64_t fixation_id;
    double k;
};

/// Batch coefficient K over an event sequence: each fixation immediately followed by
/// a saccade is scored against prefix statistics that include both values.
std::vector<OracleK> batch_k(const std::vector<GazeEvent>& events, StdKind kind = StdKind::Sample);

// ── Synthetic generators ─────────────────────────────────────────────────

struct PlantedOptions {
    double rate_hz = 120.0;
    std::size_t clusters = 6;
    double noise_px = 0.0;
    bool dropouts = false;   // insert short and long invalid runs
    double min_dwell_ms = 150.0;
    double max_dwell_ms = 600.0;
};

struct PlantedStream {
    std::vector<GazeSample> samples;
    std::size_t planted_fixations = 0;
    std::vector<Point> centres;
};

PlantedStream planted_stream(std::mt19937_64& rng, const PlantedOptions& opts, const Geometry& geom);

/// Constant-position samples at a fixed rate.
std::vector<GazeSample> still_samples(Point p, double t0, double period_ms, std::size_t n, double pupil = 4.0);

/// 20 samples at `a`, a 3-sample transit, 20 samples at `b`; 100 Hz.
std::vector<GazeSample> two_fixation_stream(Point a, Point b);

struct EventOptions {
    double dur_mean = 250.0, dur_sd = 80.0;
    double amp_mean = 5.0, amp_sd = 2.0;
    double gap_probability = 0.0;  // chance that a fixation is not followed by a saccade
};

/// Alternating fixation/saccade events with normally distributed metrics.
std::vector<GazeEvent> synthetic_events(std::mt19937_64& rng, std::size_t fixations, const EventOptions& opts,
                                        double t0 = 0.0, std::uint64_t first_id = 0);

}  // namespace gaze::testing
