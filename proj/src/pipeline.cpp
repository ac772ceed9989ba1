#include "gazestream/pipeline.hpp"

namespace gaze {

using nlohmann::json;

Pipeline::Pipeline(const SessionConfig& cfg, std::string session_id, EnvelopeSink sink)
    : cfg_(cfg),
      session_(std::move(session_id)),
      sink_(std::move(sink)),
      ivt_(cfg.ivt, cfg.geometry),
      pupil_(cfg.pupil),
      k_(cfg.k_std),
      transitions_(cfg.aois.size_with_outside(), cfg.aois.labels(), cfg.exclude_self),
      labels_(cfg.aois.labels()) {}

void Pipeline::emit(Stream s, double t_ms, json payload) {
    if (s != Stream::control && !cfg_.streams.contains(s)) {
        return;
    }
    Envelope e;
    e.session = session_;
    e.epoch = epoch_;
    e.stream = s;
    e.seq = seq_[static_cast<std::size_t>(s)]++;
    e.t_ms = t_ms;
    e.payload = std::move(payload);
    sink_(e);
}

void Pipeline::publish_control(json payload, double t_ms) {
    emit(Stream::control, t_ms, std::move(payload));
}

void Pipeline::step(const GazeSample& raw) {
    const GazeSample s = raw.valid ? clamp_to_screen(raw, cfg_.geometry) : raw;
    ++samples_seen_;
    last_t_ = s.t;

    emit(Stream::samples, s.t, sample_payload(s));
    positional_.observe(s);

    readings_.clear();
    pupil_.step(s, readings_);
    for (const auto& r : readings_) {
        emit(Stream::ripa, r.t, ripa_payload(r));
    }

    events_.clear();
    ivt_.step(s, events_);
    for (const auto& e : events_) on_event(e);
}

void Pipeline::finish() {
    events_.clear();
    ivt_.finish(events_);
    for (const auto& e : events_) on_event(e);
}

void Pipeline::on_event(const GazeEvent& e) {
    if (const auto* f = std::get_if<Fixation>(&e)) {
        const std::size_t aoi = cfg_.aois.hit(f->centroid());
        emit(Stream::fixations, f->t_end, fixation_payload(*f, aoi, labels_.at(aoi)));
        emit(Stream::positional, f->t_end, positional_payload(positional_.update(*f)));
        k_.on_fixation(*f);
        transitions_.update(aoi);
        emit(Stream::transitions, f->t_end, transitions_payload(transitions_.snapshot()));
    } else if (const auto* s = std::get_if<Saccade>(&e)) {
        emit(Stream::saccades, s->t_end, saccade_payload(*s));
        emit(Stream::positional, s->t_end, positional_payload(positional_.update(*s)));
        if (const auto k = k_.on_saccade(*s)) {
            ++k_count_;
            emit(Stream::kcoef, k->t, kcoef_payload(*k));
        }
        mainseq_.add(*s);
        if (const auto fit = mainseq_.fit()) {
            emit(Stream::mainseq, s->t_end, mainseq_payload(*fit));
        }
    } else {
        // Either gap marker breaks fixation pairings.
        k_.on_gap();
        transitions_.on_gap();
    }
}

void Pipeline::reset() {
    ivt_.reset();
    pupil_.reset();
    k_.reset();
    positional_.reset();
    transitions_.reset();
    mainseq_.reset();
    seq_.fill(0);
    ++epoch_;
    samples_seen_ = 0;
    last_t_ = 0.0;
    k_count_ = 0;
}

json Pipeline::summary() const {
    json counts = json::object();
    for (Stream s : all_streams()) {
        if (s != Stream::control && cfg_.streams.contains(s)) {
            counts[std::string(stream_name(s))] = seq_[static_cast<std::size_t>(s)];
        }
    }
    const auto snap = transitions_.snapshot();
    const auto fit = mainseq_.fit();
    return {{"session", session_},
            {"epoch", epoch_},
            {"samples", samples_seen_},
            {"counts", counts},
            {"k_samples", k_count_},
            {"positional", positional_payload(positional_.snapshot())},
            {"entropy",
             {{"H_stationary", snap.entropy.stationary ? json(*snap.entropy.stationary) : json(nullptr)},
              {"H_transition", snap.entropy.transition ? json(*snap.entropy.transition) : json(nullptr)}}},
            {"transitions", transitions_payload(snap)},
            {"mainseq", fit ? mainseq_payload(*fit) : json(nullptr)}};
}

}  // namespace gaze
