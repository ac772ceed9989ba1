#include "gazestream/pupillometry.hpp"

#include <algorithm>
#include <cmath>

namespace gaze {

namespace acc = boost::accumulators;

// ── RunningMedian ────────────────────────────────────────────────────────

RunningMedian::RunningMedian() : acc_(acc::quantile_probability = 0.5) {}

void RunningMedian::push(double v) {
    acc_(v);
    ++n_;
    if (first_.size() < 5) {
        first_.push_back(v);
    }
}

std::optional<double> RunningMedian::value() const {
    if (n_ == 0) {
        return std::nullopt;
    }
    if (n_ < 5) {
        std::vector<double> s = first_;
        std::sort(s.begin(), s.end());
        const std::size_t mid = s.size() / 2;
        return s.size() % 2 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
    }
    return acc::p_square_quantile(acc_);
}

// ── Config ───────────────────────────────────────────────────────────────

void PupilConfig::validate() const {
    if (sg_window % 2 == 0 || sg_window < sg_order + 1 || sg_order < 1) {
        throw ConfigError("pupil.sg_window must be odd and exceed sg_order (>= 1)");
    }
    if (!(gap_ms > 0.0)) throw ConfigError("pupil.gap_ms must be > 0");
    if (!(baseline_ms > 0.0)) throw ConfigError("pupil.baseline_ms must be > 0");
    if (!(epsilon > 0.0)) throw ConfigError("pupil.epsilon must be > 0");
}

// ── Preprocessing ────────────────────────────────────────────────────────

void PupilPreprocessor::step(const GazeSample& s, std::vector<PupilEvent>& out) {
    step(s.t, s.pupil(), out);
}

void PupilPreprocessor::step(double t, std::optional<double> pupil, std::vector<PupilEvent>& out) {
    if (!pupil) {
        if (!last_ || broken_) {
            return;
        }
        pending_.push_back(t);
        if (t - last_->t > max_gap_ms_) {
            out.emplace_back(GapBreak{last_->t});
            broken_ = true;
            pending_.clear();
        }
        return;
    }
    if (last_ && !pending_.empty() && !broken_) {
        if (t - last_->t <= max_gap_ms_) {
            const PupilPoint a = *last_;
            for (double ti : pending_) {
                const double f = (ti - a.t) / (t - a.t);
                out.emplace_back(PupilPoint{ti, a.value + (*pupil - a.value) * f, true});
            }
        } else {
            out.emplace_back(GapBreak{last_->t});
        }
    }
    pending_.clear();
    broken_ = false;
    last_ = PupilPoint{t, *pupil, false};
    out.emplace_back(*last_);
}

void PupilPreprocessor::reset() {
    last_.reset();
    pending_.clear();
    broken_ = false;
}

// ── RIPA ─────────────────────────────────────────────────────────────────

double ripa_index(double m, double scale) {
    const double x = m / scale;
    if (!std::isfinite(x)) {
        return std::nextafter(1.0, 0.0);
    }
    const double r = x / (1.0 + x);
    return r < 1.0 ? r : std::nextafter(1.0, 0.0);
}

RipaState::RipaState(const PupilConfig& cfg) : cfg_(cfg), deriv_(cfg.sg_window, cfg.sg_order, 1) {}

std::optional<double> RipaState::step(double t, double pupil) {
    if (last_t_ && t > *last_t_) {
        intervals_ms_.push(t - *last_t_);
    }
    last_t_ = t;
    window_.push_back(pupil);
    if (window_.size() > cfg_.sg_window) {
        window_.pop_front();
    }
    if (window_.size() < cfg_.sg_window) {
        return std::nullopt;
    }
    const auto dt_s = sample_interval_s();
    if (!dt_s || !(*dt_s > 0.0)) {
        return std::nullopt;
    }
    const std::vector<double> w(window_.begin(), window_.end());
    const double m = std::abs(deriv_.apply(w)) / *dt_s;
    const double r = ripa_index(m, scale());
    activity_.push(m);
    last_m_ = m;
    return r;
}

void RipaState::on_gap() {
    window_.clear();
    last_t_.reset();
}

void RipaState::reset() {
    *this = RipaState(cfg_);
}

void RipaState::seed_scale(double s) {
    for (int i = 0; i < 5; ++i) {
        activity_.push(s);
    }
}

double RipaState::scale() const {
    return std::max(activity_.value().value_or(0.0), cfg_.epsilon);
}

std::optional<double> RipaState::sample_interval_s() const {
    const auto v = intervals_ms_.value();
    if (!v) return std::nullopt;
    return *v / 1000.0;
}

// ── PCPD ─────────────────────────────────────────────────────────────────

std::optional<double> pcpd(double pupil, std::optional<double> baseline) {
    if (!baseline || !(*baseline > 0.0)) {
        return std::nullopt;
    }
    return 100.0 * (pupil - *baseline) / *baseline;
}

void PupilBaseline::push(double t, double pupil) {
    if (value_) {
        return;
    }
    if (!t0_) {
        t0_ = t;
    }
    if (t - *t0_ < window_ms_) {
        sum_ += pupil;
        ++n_;
        return;
    }
    value_ = sum_ / static_cast<double>(n_);
}

void PupilBaseline::reset() {
    t0_.reset();
    sum_ = 0.0;
    n_ = 0;
    value_.reset();
}

// ── Chain ────────────────────────────────────────────────────────────────

Pupillometry::Pupillometry(const PupilConfig& cfg)
    : cfg_(cfg), pre_(cfg.gap_ms), ripa_(cfg), baseline_(cfg.baseline_ms) {
    cfg_.validate();
}

void Pupillometry::step(const GazeSample& s, std::vector<RipaReading>& out) {
    scratch_.clear();
    pre_.step(s, scratch_);
    for (const auto& ev : scratch_) {
        if (const auto* gap = std::get_if<GapBreak>(&ev)) {
            (void)gap;
            ripa_.on_gap();
            continue;
        }
        const auto& p = std::get<PupilPoint>(ev);
        baseline_.push(p.t, p.value);
        const double scale_before = ripa_.scale();
        const auto r = ripa_.step(p.t, p.value);
        if (!r) {
            continue;
        }
        RipaReading reading;
        reading.t = p.t;
        reading.pupil = p.value;
        reading.ripa = *r;
        reading.activity = ripa_.last_activity();
        reading.scale = scale_before;
        reading.pcpd = pcpd(p.value, baseline_.value());
        out.push_back(reading);
    }
}

void Pupillometry::reset() {
    pre_.reset();
    ripa_.reset();
    baseline_.reset();
}

}  // namespace gaze
