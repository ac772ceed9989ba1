#include "gazestream/measures.hpp"

#include <algorithm>
#include <cmath>

namespace gaze {

// ── Coefficient K ────────────────────────────────────────────────────────

std::optional<KSample> coefficient_k(const Fixation& fixation, const Saccade& next_saccade,
                                     const RunningStats& stats_d, const RunningStats& stats_a,
                                     StdKind kind) {
    if (stats_d.count() < 2 || stats_a.count() < 2) {
        return std::nullopt;
    }
    const auto sd = stats_d.stddev(kind);
    const auto sa = stats_a.stddev(kind);
    if (!sd || !sa || !(*sd > 0.0) || !(*sa > 0.0)) {
        return std::nullopt;
    }
    KSample out;
    out.fixation_id = fixation.id;
    out.t = next_saccade.t_end;
    out.d_i = fixation.duration;
    out.a_next = next_saccade.amplitude;
    out.k = (fixation.duration - stats_d.mean()) / *sd - (next_saccade.amplitude - stats_a.mean()) / *sa;
    out.pupil_at_fixation = fixation.mean_pupil;
    return out;
}

void KTracker::on_fixation(const Fixation& f) {
    stats_d_.push(f.duration);
    pending_ = f;
}

std::optional<KSample> KTracker::on_saccade(const Saccade& s) {
    stats_a_.push(s.amplitude);
    if (!pending_) {
        return std::nullopt;
    }
    const Fixation f = *pending_;
    pending_.reset();
    return coefficient_k(f, s, stats_d_, stats_a_, kind_);
}

void KTracker::reset() {
    stats_d_.reset();
    stats_a_.reset();
    pending_.reset();
}

// ── Positional statistics ────────────────────────────────────────────────

void PositionalTracker::Extremes::push(double v) {
    if (stats.count() == 0) {
        min = max = v;
    } else {
        min = std::min(min, v);
        max = std::max(max, v);
    }
    stats.push(v);
}

std::optional<Summary> PositionalTracker::Extremes::summary() const {
    if (stats.count() == 0) {
        return std::nullopt;
    }
    return Summary{stats.count(), stats.mean(), stats.stddev(StdKind::Sample), min, max};
}

void PositionalTracker::Eye::push(const std::optional<double>& v) {
    if (v && std::isfinite(*v) && *v > 0.0) {
        current = *v;
        stats.push(*v);
    }
}

PositionalStats PositionalTracker::update(const Fixation& f) {
    fixation_duration_.push(f.duration);
    return snapshot();
}

PositionalStats PositionalTracker::update(const Saccade& s) {
    saccade_amplitude_.push(s.amplitude);
    return snapshot();
}

void PositionalTracker::observe(const GazeSample& s) {
    if (!s.valid) {
        return;
    }
    left_.push(s.pupil_left);
    right_.push(s.pupil_right);
}

PositionalStats PositionalTracker::snapshot() const {
    PositionalStats out;
    out.fixation_count = fixation_duration_.stats.count();
    out.saccade_count = saccade_amplitude_.stats.count();
    out.fixation_duration = fixation_duration_.summary();
    out.saccade_amplitude = saccade_amplitude_.summary();
    auto eye = [](const Eye& e) {
        PupilReading r;
        r.current = e.current;
        if (e.stats.count() > 0) r.mean = e.stats.mean();
        return r;
    };
    out.pupil_left = eye(left_);
    out.pupil_right = eye(right_);
    return out;
}

// ── Main sequence ────────────────────────────────────────────────────────

void MainSequence::Regression::push(double x, double y) {
    ++n;
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    const double k = static_cast<double>(n);
    mean_x += dx / k;
    mean_y += dy / k;
    sxx += dx * (x - mean_x);
    syy += dy * (y - mean_y);
    sxy += dx * (y - mean_y);
}

double MainSequence::Regression::residual_std() const {
    if (n <= 2) return 0.0;
    const double ssr = std::max(0.0, syy - sxy * sxy / sxx);
    return std::sqrt(ssr / static_cast<double>(n - 2));
}

void MainSequence::add(const Saccade& s) {
    if (!(s.amplitude > 0.0) || !(s.peak_velocity > 0.0)) {
        return;
    }
    const double la = std::log(s.amplitude);
    const double lv = std::log(s.peak_velocity);
    velocity_.push(la, lv);
    duration_.push(s.amplitude, s.duration);
    points_.push_back({s.id, la, lv});
}

std::optional<MainSequenceFit> MainSequence::fit() const {
    if (points_.size() < kMinSaccades || !(velocity_.sxx > 0.0) || !(duration_.sxx > 0.0)) {
        return std::nullopt;
    }
    MainSequenceFit out;
    out.n_saccades = points_.size();
    out.alpha = velocity_.slope();
    const double log_c = velocity_.intercept();
    out.c = std::exp(log_c);
    out.velocity_residual_std = velocity_.residual_std();
    out.m = duration_.slope();
    out.d0 = duration_.intercept();
    out.duration_residual_std = duration_.residual_std();

    // Floor keeps round-off on noiseless data from being flagged.
    const double limit = std::max(kOutlierSigma * out.velocity_residual_std, 1e-9);
    for (const auto& p : points_) {
        const double r = p.log_v - (log_c + out.alpha * p.log_a);
        if (std::abs(r) > limit) {
            out.outliers.push_back(p.id);
        }
    }
    return out;
}

std::optional<MainSequenceFit> main_sequence_fit(std::span<const Saccade> saccades) {
    MainSequence ms;
    for (const auto& s : saccades) {
        ms.add(s);
    }
    return ms.fit();
}

}  // namespace gaze
