#include "gazestream/ivt.hpp"

#include <algorithm>
#include <cmath>

namespace gaze {

void IvtConfig::validate() const {
    if (!(velocity_threshold > 0.0)) throw ConfigError("ivt.velocity_threshold must be > 0");
    if (!(min_fixation_duration > 0.0)) throw ConfigError("ivt.min_fixation_duration must be > 0");
    if (!(max_gap_interpolation > 0.0)) throw ConfigError("ivt.max_gap_interpolation must be > 0");
    if (!(min_saccade_amplitude > 0.0)) throw ConfigError("ivt.min_saccade_amplitude must be > 0");
}

double event_time(const GazeEvent& e) {
    return std::visit(
        [](const auto& ev) {
            using T = std::decay_t<decltype(ev)>;
            if constexpr (std::is_same_v<T, Fixation> || std::is_same_v<T, Saccade>) {
                return ev.t_end;
            } else {
                return ev.t;
            }
        },
        e);
}

void IvtClassifier::Accum::add(const Accum& o) {
    if (n == 0) {
        *this = o;
        return;
    }
    n += o.n;
    sum_x += o.sum_x;
    sum_y += o.sum_y;
    sum_v += o.sum_v;
    max_v = std::max(max_v, o.max_v);
    sum_pupil += o.sum_pupil;
    n_pupil += o.n_pupil;
}

Point IvtClassifier::Accum::centroid() const {
    const double k = static_cast<double>(n);
    return {sum_x / k, sum_y / k};
}

IvtClassifier::IvtClassifier(IvtConfig cfg, Geometry geom) : cfg_(cfg), geom_(geom) {
    cfg_.validate();
    geom_.validate();
}

IvtClassifier::Phase IvtClassifier::phase() const {
    if (in_gap_) return Phase::Gap;
    if (!open_) return Phase::Idle;
    return open_->label == Label::Fix ? Phase::Fixating : Phase::Saccading;
}

void IvtClassifier::reset() {
    last_t_.reset();
    prev_.reset();
    pending_invalid_.clear();
    in_gap_ = false;
    open_.reset();
    held_.reset();
    between_.reset();
    next_fixation_id_ = 0;
    next_saccade_id_ = 0;
}

std::vector<GazeEvent> IvtClassifier::step(const GazeSample& sample) {
    std::vector<GazeEvent> out;
    step(sample, out);
    return out;
}

std::vector<GazeEvent> IvtClassifier::finish() {
    std::vector<GazeEvent> out;
    finish(out);
    return out;
}

void IvtClassifier::step(const GazeSample& s, std::vector<GazeEvent>& out) {
    if (last_t_ && !(s.t > *last_t_)) {
        throw MalformedStream("out-of-order sample at t=" + std::to_string(s.t));
    }
    last_t_ = s.t;

    if (!s.valid) {
        if (in_gap_) {
            return;
        }
        if (!prev_) {
            // Nothing to interpolate from: the gap starts right here.
            in_gap_ = true;
            out.emplace_back(GapStarted{s.t});
            return;
        }
        pending_invalid_.push_back(s.t);
        if (s.t - prev_->t > cfg_.max_gap_interpolation) {
            const double gap_start = prev_->t;
            close_run(out);
            in_gap_ = true;
            out.emplace_back(GapStarted{gap_start});
        }
        return;
    }

    const Point3 p{s.t, s.x, s.y};
    if (in_gap_) {
        in_gap_ = false;
        out.emplace_back(GapEnded{s.t});
    } else if (!pending_invalid_.empty() && prev_) {
        if (s.t - prev_->t <= cfg_.max_gap_interpolation) {
            const Point3 a = *prev_;
            for (double ti : pending_invalid_) {
                const double f = (ti - a.t) / (p.t - a.t);
                feed_point({ti, a.x + (p.x - a.x) * f, a.y + (p.y - a.y) * f}, std::nullopt, out);
            }
            pending_invalid_.clear();
        } else {
            const double gap_start = prev_->t;
            close_run(out);
            out.emplace_back(GapStarted{gap_start});
            out.emplace_back(GapEnded{s.t});
        }
    }
    feed_point(p, s.pupil(), out);
}

void IvtClassifier::feed_point(const Point3& p, std::optional<double> pupil, std::vector<GazeEvent>& out) {
    std::optional<double> v;
    if (prev_) {
        v = px_to_deg({prev_->x, prev_->y}, {p.x, p.y}, geom_) / ((p.t - prev_->t) / 1000.0);
    }
    const Label label = (v && *v >= cfg_.velocity_threshold) ? Label::Sac : Label::Fix;

    if (open_ && open_->label != label) {
        close_segment(p.t, out);
    }
    if (!open_) {
        open_ = Segment{label, Accum{}};
        open_->acc.t_first = p.t;
    }
    Accum& a = open_->acc;
    ++a.n;
    a.sum_x += p.x;
    a.sum_y += p.y;
    const double vel = v.value_or(0.0);
    a.sum_v += vel;
    a.max_v = std::max(a.max_v, vel);
    if (pupil) {
        a.sum_pupil += *pupil;
        ++a.n_pupil;
    }
    prev_ = p;
}

void IvtClassifier::close_segment(double t_end, std::vector<GazeEvent>& out) {
    Segment seg = *open_;
    open_.reset();
    if (seg.label == Label::Fix && t_end - seg.acc.t_first >= cfg_.min_fixation_duration) {
        on_retained(seg.acc, t_end, out);
        return;
    }
    if (!between_) {
        between_ = seg.acc;
    } else {
        between_->add(seg.acc);
    }
}

void IvtClassifier::on_retained(const Accum& fix, double t_end, std::vector<GazeEvent>& out) {
    if (!held_) {
        // Anything before the first retained fixation of a run is a partial event.
        between_.reset();
        held_ = HeldFixation{fix, t_end};
        return;
    }
    if (!between_) {
        held_->acc.add(fix);
        held_->t_end = t_end;
        return;
    }
    const double amplitude = px_to_deg(held_->acc.centroid(), fix.centroid(), geom_);
    if (amplitude < cfg_.min_saccade_amplitude) {
        held_->acc.add(*between_);
        held_->acc.add(fix);
        held_->t_end = t_end;
        between_.reset();
        return;
    }
    emit_fixation(*held_, out);
    Saccade sac;
    sac.id = next_saccade_id_++;
    sac.t_start = between_->t_first;
    sac.t_end = fix.t_first;
    sac.duration = sac.t_end - sac.t_start;
    sac.amplitude = amplitude;
    sac.peak_velocity = between_->max_v;
    sac.mean_velocity = between_->sum_v / static_cast<double>(between_->n);
    out.emplace_back(sac);
    between_.reset();
    held_ = HeldFixation{fix, t_end};
}

void IvtClassifier::emit_fixation(const HeldFixation& h, std::vector<GazeEvent>& out) {
    Fixation f;
    f.id = next_fixation_id_++;
    f.t_start = h.acc.t_first;
    f.t_end = h.t_end;
    f.duration = f.t_end - f.t_start;
    const Point c = h.acc.centroid();
    f.centroid_x = c.x;
    f.centroid_y = c.y;
    if (h.acc.n_pupil > 0) {
        f.mean_pupil = h.acc.sum_pupil / static_cast<double>(h.acc.n_pupil);
    }
    out.emplace_back(f);
}

void IvtClassifier::close_run(std::vector<GazeEvent>& out) {
    if (open_ && prev_) {
        close_segment(prev_->t, out);
    }
    if (held_) {
        emit_fixation(*held_, out);
    }
    open_.reset();
    held_.reset();
    between_.reset();
    prev_.reset();
    pending_invalid_.clear();
}

void IvtClassifier::finish(std::vector<GazeEvent>& out) {
    close_run(out);
}

}  // namespace gaze
