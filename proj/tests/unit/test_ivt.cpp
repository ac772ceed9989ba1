#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "gazestream/ivt.hpp"
#include "oracles.hpp"

using namespace gaze;
using gaze::testing::batch_ivt;
using gaze::testing::same_events;
using gaze::testing::still_samples;
using gaze::testing::stream_ivt;

namespace {

const Geometry kDesk{1920, 1080, 531, 299, 650};

/// Horizontal pixel offset subtending `deg` degrees centred on the chord.
double px_for_deg(double deg) {
    const double chord_mm = 2.0 * kDesk.viewing_distance_mm * std::tan(deg / 2.0 * std::numbers::pi / 180.0);
    return chord_mm / kDesk.mm_per_px_x();
}

template <typename T>
std::size_t count_of(const std::vector<GazeEvent>& ev) {
    std::size_t n = 0;
    for (const auto& e : ev) n += std::holds_alternative<T>(e);
    return n;
}

template <typename T>
std::vector<T> all_of(const std::vector<GazeEvent>& ev) {
    std::vector<T> out;
    for (const auto& e : ev)
        if (const auto* p = std::get_if<T>(&e)) out.push_back(*p);
    return out;
}

std::vector<GazeSample> two_clusters(double deg) {
    const double dx = px_for_deg(deg);
    const Point a{700, 540}, b{700 + dx, 540};
    auto s = still_samples(a, 0.0, 10.0, 20);
    for (int j = 1; j <= 3; ++j) {
        const double f = j / 4.0;
        GazeSample g{200.0 + 10.0 * (j - 1), a.x + (b.x - a.x) * f, 540};
        g.pupil_left = g.pupil_right = 4.0;
        s.push_back(g);
    }
    for (const auto& g : still_samples(b, 230.0, 10.0, 20)) s.push_back(g);
    return s;
}

}  // namespace

TEST_CASE("a single stationary run yields exactly one fixation") {
    const auto events = stream_ivt(still_samples({400, 300}, 0.0, 10.0, 30), IvtConfig{}, kDesk);
    REQUIRE(events.size() == 1);
    const auto& f = std::get<Fixation>(events[0]);
    CHECK(f.duration == doctest::Approx(300.0).epsilon(0.05));
    CHECK(f.duration == f.t_end - f.t_start);
    CHECK(f.centroid_x == 400.0);
    CHECK(f.centroid_y == 300.0);
    CHECK(*f.mean_pupil == doctest::Approx(4.0));
}

TEST_CASE("two clusters 10 degrees apart yield fixation, saccade, fixation") {
    const auto samples = two_clusters(10.0);
    const auto events = stream_ivt(samples, IvtConfig{}, kDesk);
    REQUIRE(events.size() == 3);
    CHECK(std::holds_alternative<Fixation>(events[0]));
    const auto& s = std::get<Saccade>(events[1]);
    CHECK(std::holds_alternative<Fixation>(events[2]));
    CHECK(s.amplitude == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(s.peak_velocity > 0.0);
    CHECK(s.peak_velocity >= s.mean_velocity);
    CHECK(s.duration > 0.0);
    std::string why;
    CHECK_MESSAGE(same_events(events, batch_ivt(samples, IvtConfig{}, kDesk), 1e-12, &why), why);
}

TEST_CASE("all-invalid stream: no events but one GapStarted") {
    auto s = still_samples({10, 10}, 0, 10, 40);
    for (auto& g : s) g.valid = false;
    const auto events = stream_ivt(s, IvtConfig{}, kDesk);
    REQUIRE(events.size() == 1);
    CHECK(std::holds_alternative<GapStarted>(events[0]));
}

TEST_CASE("out-of-order sample is a malformed stream") {
    IvtClassifier c(IvtConfig{}, kDesk);
    c.step(GazeSample{10.0, 1, 1});
    CHECK_THROWS_AS(c.step(GazeSample{5.0, 1, 1}), MalformedStream);
    CHECK_THROWS_AS(c.step(GazeSample{10.0, 1, 1}), MalformedStream);
}

TEST_CASE("short fixations fold into the surrounding saccade") {
    // A, fast, 30 ms pause, fast, B: the pause is below min_fixation_duration.
    const double dx = px_for_deg(6.0);
    auto s = still_samples({500, 500}, 0, 10, 20);
    double t = 200;
    auto add = [&](double x) {
        s.push_back(GazeSample{t, x, 500});
        t += 10;
    };
    add(500 + dx * 0.25);
    add(500 + dx * 0.5);
    add(500 + dx * 0.5);
    add(500 + dx * 0.5);
    add(500 + dx * 0.75);
    for (int i = 0; i < 20; ++i) add(500 + dx);
    const auto events = stream_ivt(s, IvtConfig{}, kDesk);
    REQUIRE(count_of<Fixation>(events) == 2);
    REQUIRE(count_of<Saccade>(events) == 1);
    const auto sac = all_of<Saccade>(events)[0];
    CHECK(sac.t_start == 200.0);
    CHECK(sac.amplitude == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("sub-threshold saccade amplitude merges its fixations") {
    const auto events = stream_ivt(two_clusters(0.3), IvtConfig{}, kDesk);
    REQUIRE(events.size() == 1);
    const auto& f = std::get<Fixation>(events[0]);
    CHECK(f.t_start == 0.0);
    CHECK(f.t_end == 420.0);
}

TEST_CASE("dropouts: short ones are bridged, long ones split the run") {
    IvtConfig cfg;
    auto s = still_samples({500, 500}, 0, 10, 60);
    SUBCASE("short") {
        for (int i = 20; i < 25; ++i) s[i].valid = false;  // span 60 ms <= 75 ms
        const auto events = stream_ivt(s, cfg, kDesk);
        REQUIRE(events.size() == 1);
        CHECK(std::get<Fixation>(events[0]).duration == 590.0);
    }
    SUBCASE("long") {
        for (int i = 20; i < 30; ++i) s[i].valid = false;  // span 110 ms
        const auto events = stream_ivt(s, cfg, kDesk);
        REQUIRE(events.size() == 4);
        CHECK(std::get<Fixation>(events[0]).t_end == 190.0);
        CHECK(std::get<GapStarted>(events[1]).t == 190.0);
        CHECK(std::get<GapEnded>(events[2]).t == 300.0);
        CHECK(std::get<Fixation>(events[3]).t_start == 300.0);
    }
    SUBCASE("gap is detected while still invalid") {
        IvtClassifier c(cfg, kDesk);
        for (int i = 0; i < 20; ++i) c.step(s[i]);
        std::vector<GazeEvent> out;
        for (int i = 20; i < 28; ++i) {  // 270 - 190 = 80 ms > max_gap
            s[i].valid = false;
            c.step(s[i], out);
        }
        REQUIRE(out.size() == 2);
        CHECK(std::holds_alternative<Fixation>(out[0]));
        CHECK(std::holds_alternative<GapStarted>(out[1]));
        CHECK(c.phase() == IvtClassifier::Phase::Gap);
    }
}

TEST_CASE("config validation") {
    IvtConfig cfg;
    cfg.velocity_threshold = 0;
    CHECK_THROWS_AS(IvtClassifier(cfg, kDesk), ConfigError);
}

TEST_CASE("property: streaming equals the batch oracle on random streams") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> rate(60.0, 500.0), noise(0.0, 2.0);
    std::uniform_int_distribution<int> clusters(1, 12);
    for (int iter = 0; iter < 150; ++iter) {
        testing::PlantedOptions o;
        o.rate_hz = rate(rng);
        o.clusters = static_cast<std::size_t>(clusters(rng));
        o.noise_px = iter % 3 == 0 ? 0.0 : noise(rng);
        o.dropouts = iter % 2 == 0;
        o.min_dwell_ms = 20.0;  // include sub-minimum dwells
        const auto ps = testing::planted_stream(rng, o, kDesk);
        std::string why;
        REQUIRE_MESSAGE(same_events(stream_ivt(ps.samples, IvtConfig{}, kDesk), batch_ivt(ps.samples, IvtConfig{}, kDesk),
                                    1e-9, &why),
                        "stream " << iter << ": " << why);
    }
}

TEST_CASE("property: event invariants and timeline partition") {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 100; ++iter) {
        testing::PlantedOptions o;
        o.clusters = 10;
        o.noise_px = 1.0;
        o.dropouts = true;
        const auto ps = testing::planted_stream(rng, o, kDesk);
        const IvtConfig cfg;
        const auto events = stream_ivt(ps.samples, cfg, kDesk);
        double cursor = -1.0;
        int last_kind = -1;  // 0 fixation, 1 saccade, 2 gap
        for (const auto& e : events) {
            if (const auto* f = std::get_if<Fixation>(&e)) {
                CHECK(f->duration >= cfg.min_fixation_duration);
                CHECK(f->t_start >= cursor);
                CHECK(last_kind != 0);  // never two fixations back to back within a run
                cursor = f->t_end;
                last_kind = 0;
            } else if (const auto* s = std::get_if<Saccade>(&e)) {
                CHECK(s->amplitude >= cfg.min_saccade_amplitude);
                CHECK(s->peak_velocity >= s->mean_velocity);
                CHECK(s->mean_velocity >= 0.0);
                CHECK(s->duration > 0.0);
                CHECK(last_kind == 0);
                CHECK(s->t_start == cursor);  // saccade starts where its fixation ended
                cursor = s->t_end;
                last_kind = 1;
            } else if (const auto* g = std::get_if<GapStarted>(&e)) {
                CHECK(g->t >= cursor);
                cursor = g->t;
                last_kind = 2;
            } else {
                const auto& ge = std::get<GapEnded>(e);
                CHECK(ge.t > cursor);
                cursor = ge.t;
                last_kind = 2;
            }
        }
    }
}

TEST_CASE("property: raising the velocity threshold never reduces fixation time") {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 100; ++iter) {
        testing::PlantedOptions o;
        o.clusters = 8;
        o.noise_px = 1.5;
        o.rate_hz = 250;
        const auto ps = testing::planted_stream(rng, o, kDesk);
        double previous = -1.0;
        for (double thr : {10.0, 20.0, 30.0, 45.0, 60.0, 90.0}) {
            IvtConfig cfg;
            cfg.velocity_threshold = thr;
            double total = 0.0;
            for (const auto& f : all_of<Fixation>(stream_ivt(ps.samples, cfg, kDesk))) total += f.duration;
            CHECK(total >= previous);
            previous = total;
        }
    }
}

TEST_CASE("noiseless planted clusters are recovered one-to-one") {
    std::mt19937_64 rng(3);
    for (int iter = 0; iter < 50; ++iter) {
        testing::PlantedOptions o;
        o.clusters = 2 + iter % 9;
        const auto ps = testing::planted_stream(rng, o, kDesk);
        const auto fix = all_of<Fixation>(stream_ivt(ps.samples, IvtConfig{}, kDesk));
        REQUIRE(fix.size() == ps.planted_fixations);
        for (std::size_t i = 0; i < fix.size(); ++i) {
            CHECK(fix[i].centroid_x == doctest::Approx(ps.centres[i].x));
            CHECK(fix[i].centroid_y == doctest::Approx(ps.centres[i].y));
        }
    }
}
