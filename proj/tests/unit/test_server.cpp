#include "doctest.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "gazestream/batch.hpp"
#include "gazestream/envelope.hpp"
#include "gazestream/hub.hpp"
#include "gazestream/pipeline.hpp"
#include "gazestream/session_config.hpp"
#include "oracles.hpp"

using namespace gaze;
using nlohmann::json;
using gaze::testing::two_fixation_stream;

namespace fs = std::filesystem;

namespace {

const fs::path kSource = GAZESTREAM_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("gazestream_test_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<GazeSample> two_fixations() { return two_fixation_stream({700, 540}, {1100, 540}); }

std::vector<Envelope> run_pipeline(const SessionConfig& cfg, const std::vector<GazeSample>& samples,
                                   const std::string& id = "s") {
    std::vector<Envelope> out;
    Pipeline p(cfg, id, [&](const Envelope& e) { out.push_back(e); });
    for (const auto& s : samples) p.step(s);
    p.finish();
    return out;
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Random JSON values, nested a little.
json random_json(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 6 : 4);
    std::uniform_real_distribution<double> real(-1e6, 1e6);
    switch (kind(rng)) {
        case 0: return nullptr;
        case 1: return static_cast<bool>(rng() & 1);
        case 2: return real(rng) * std::ldexp(1.0, static_cast<int>(rng() % 40) - 20);
        case 3: return static_cast<std::int64_t>(rng() % 100000) - 50000;
        case 4: {
            static const char* pieces[] = {"a", "b", " ", "\"", "\\", "/", "\n", "\t", "\xc3\xa9", "\xe2\x82\xac"};
            std::string s;
            for (int i = 0, n = static_cast<int>(rng() % 8); i < n; ++i) s += pieces[rng() % std::size(pieces)];
            return s;
        }
        case 5: {
            json a = json::array();
            for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) a.push_back(random_json(rng, depth - 1));
            return a;
        }
        default: {
            json o = json::object();
            for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i)
                o["k" + std::to_string(rng() % 10)] = random_json(rng, depth - 1);
            return o;
        }
    }
}

}  // namespace

// ── Envelope ─────────────────────────────────────────────────────────────

TEST_CASE("stream names round-trip and unknown names are rejected") {
    for (Stream s : all_streams()) CHECK(stream_from_name(stream_name(s)) == s);
    CHECK_THROWS_AS(stream_from_name("pupil"), ConfigError);
    CHECK_THROWS_AS(StreamSet::from_json(json::array({"fixations", "nope"})), ConfigError);
    CHECK_THROWS_AS(StreamSet::from_json(json("fixations")), ConfigError);

    const auto set = StreamSet::from_json(json::array({"ripa", "kcoef"}));
    CHECK(set.contains(Stream::ripa));
    CHECK(set.contains(Stream::kcoef));
    CHECK_FALSE(set.contains(Stream::fixations));
    CHECK(StreamSet::from_json(set.to_json()) == set);
    CHECK_FALSE(StreamSet::measures().contains(Stream::control));
}

TEST_CASE("property: serialize then parse reproduces the envelope") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        Envelope e;
        e.session = "sess-" + std::to_string(rng() % 1000);
        e.epoch = rng() % 5;
        e.stream = all_streams()[rng() % kStreamCount];
        e.seq = rng() % (1ull << 50);
        e.t_ms = std::uniform_real_distribution<double>(0, 1e9)(rng);
        e.payload = random_json(rng, 3);
        const auto text = serialize(e);
        CHECK(text.find('\n') == std::string::npos);
        CHECK(parse_envelope(text) == e);
    }
}

TEST_CASE("real payloads round-trip through the codec") {
    SessionConfig cfg;
    cfg.aois = AoiSet::grid(2, 2, cfg.geometry);
    for (const auto& e : run_pipeline(cfg, two_fixations())) {
        CHECK(parse_envelope(serialize(e)) == e);
    }
}

TEST_CASE("malformed envelopes are rejected") {
    const json good = to_json(Envelope{1, "s", 0, Stream::fixations, 3, 10.0, json::object()});
    CHECK_NOTHROW(envelope_from_json(good));
    for (const char* key : {"v", "session", "epoch", "stream", "seq", "t_ms", "payload"}) {
        json bad = good;
        bad.erase(key);
        CHECK_THROWS_AS(envelope_from_json(bad), MalformedStream);
    }
    json bad = good;
    bad["v"] = 2;
    CHECK_THROWS_AS(envelope_from_json(bad), MalformedStream);
    bad = good;
    bad["stream"] = "gaze";
    CHECK_THROWS_AS(envelope_from_json(bad), MalformedStream);
    bad = good;
    bad["seq"] = -1;
    CHECK_THROWS_AS(envelope_from_json(bad), MalformedStream);
    CHECK_THROWS_AS(parse_envelope("{not json"), MalformedStream);
    CHECK_THROWS_AS(parse_envelope("[1,2]"), MalformedStream);
}

// ── Session config ───────────────────────────────────────────────────────

TEST_CASE("the example session config loads and validates") {
    const auto cfg = SessionConfig::load(kSource / "config" / "session.json");
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.column_map.format_name == "visual-scanning");
    CHECK(cfg.aois.aois().size() == 4);
    CHECK(cfg.pupil.sg_window == 7);
    CHECK(cfg.speed == Speed::realtime());
    CHECK_FALSE(cfg.streams.contains(Stream::samples));
    CHECK(cfg.streams.contains(Stream::control));
}

TEST_CASE("session config round-trips through to_json") {
    json j = {{"input", "data.csv"},
              {"column_map", {{"preset", "driving-sim"}}},
              {"aois", {{"grid", {{"rows", 2}, {"cols", 3}}}}},
              {"ivt", {{"velocity_threshold", 45}}},
              {"pupil", {{"sg_window", 9}, {"sg_order", 3}}},
              {"measures", {{"population_std", true}}},
              {"transitions", {{"exclude_self", true}}},
              {"replay", {{"speed", "max"}}},
              {"server", {{"port", 9000}, {"queue_capacity", 64}}},
              {"streams", {"fixations", "kcoef"}}};
    const auto a = SessionConfig::from_json(j, "/data");
    CHECK(a.input == fs::path("/data/data.csv"));
    CHECK(a.aois.aois().size() == 6);
    CHECK(a.ivt.velocity_threshold == 45.0);
    CHECK(a.k_std == StdKind::Population);
    CHECK(a.exclude_self);
    CHECK(a.speed.is_max());
    CHECK(a.server.port == 9000);
    CHECK(a.server.queue_capacity == 64);
    CHECK(a.streams == StreamSet::from_json(json::array({"fixations", "kcoef"})));

    const auto b = SessionConfig::from_json(a.to_json());
    CHECK(b.to_json() == a.to_json());
}

TEST_CASE("session config rejects bad documents") {
    const json base = {{"input", "x.csv"}, {"column_map", {{"preset", "driving-sim"}}}};
    CHECK_NOTHROW(SessionConfig::from_json(base));

    auto with = [&](const std::string& key, json v) {
        json j = base;
        j[key] = std::move(v);
        return j;
    };
    CHECK_THROWS_AS(SessionConfig::from_json(with("colour", 1)), ConfigError);
    CHECK_THROWS_AS(SessionConfig::from_json(with("ivt", {{"threshold", 30}})), ConfigError);
    CHECK_THROWS_AS(SessionConfig::from_json(with("replay", {{"speed", 0}})), ConfigError);
    CHECK_THROWS_AS(SessionConfig::from_json(with("replay", {{"speed", "fast"}})), ConfigError);
    CHECK_THROWS_AS(SessionConfig::from_json(with("streams", {"fixations", "gaze"})), ConfigError);
    CHECK_THROWS_AS(SessionConfig::from_json(with("column_map", {{"preset", "eyelink"}})), ConfigError);
    json no_map = base;
    no_map.erase("column_map");
    CHECK_THROWS_AS(SessionConfig::from_json(no_map), ConfigError);
    CHECK_THROWS_AS(SessionConfig::load("/nonexistent/session.json"), ConfigError);
}

TEST_CASE("validation checks the whole document") {
    const fs::path dir = scratch("validate");
    fs::create_directories(dir);
    std::ofstream(dir / "in.csv") << "timestamp,gaze_x,gaze_y\n0,1,1\n";
    const json base = {{"input", "in.csv"}, {"column_map", {{"preset", "driving-sim"}}}};

    CHECK_NOTHROW(SessionConfig::from_json(base, dir).validate());
    CHECK_THROWS_AS(SessionConfig::from_json(base, dir / "elsewhere").validate(), ConfigError);

    auto invalid = [&](auto&& mutate) {
        auto c = SessionConfig::from_json(base, dir);
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    invalid([](SessionConfig& c) { c.ivt.velocity_threshold = 0; });
    invalid([](SessionConfig& c) { c.pupil.sg_window = 4; });
    invalid([](SessionConfig& c) { c.geometry.viewing_distance_mm = -1; });
    invalid([](SessionConfig& c) { c.server.queue_capacity = 0; });
    invalid([](SessionConfig& c) { c.streams = StreamSet{}; });
    invalid([](SessionConfig& c) {
        Aoi wide;
        wide.label = "wide";
        wide.w = 5000;
        wide.h = 10;
        c.aois = AoiSet({wide});
    });
}

// ── Pipeline ─────────────────────────────────────────────────────────────

TEST_CASE("the first fixation of a session has seq 0") {
    SessionConfig cfg;
    const auto out = run_pipeline(cfg, two_fixations(), "abc");
    std::vector<Envelope> fix;
    for (const auto& e : out)
        if (e.stream == Stream::fixations) fix.push_back(e);
    REQUIRE(fix.size() == 2);
    CHECK(fix[0].seq == 0);
    CHECK(fix[1].seq == 1);
    CHECK(fix[0].session == "abc");
    CHECK(fix[0].epoch == 0);
    CHECK(fix[0].v == 1);
    CHECK(fix[0].payload.at("aoi") == 0);
    CHECK(fix[0].payload.at("aoi_label") == "outside");
}

TEST_CASE("reset restarts every counter under a new epoch") {
    SessionConfig cfg;
    std::vector<Envelope> out;
    Pipeline p(cfg, "s", [&](const Envelope& e) { out.push_back(e); });
    for (const auto& s : two_fixations()) p.step(s);
    p.finish();
    CHECK(p.published(Stream::fixations) == 2);

    p.reset();
    CHECK(p.epoch() == 1);
    for (Stream s : all_streams()) CHECK(p.published(s) == 0);
    out.clear();
    for (const auto& s : two_fixations()) p.step(s);
    p.finish();
    const auto first = std::find_if(out.begin(), out.end(), [](const Envelope& e) { return e.stream == Stream::fixations; });
    REQUIRE(first != out.end());
    CHECK(first->seq == 0);
    CHECK(first->epoch == 1);
}

TEST_CASE("disabled streams are neither emitted nor counted") {
    SessionConfig cfg;
    cfg.streams = StreamSet::from_json(json::array({"fixations"}));
    const auto out = run_pipeline(cfg, two_fixations());
    REQUIRE(out.size() == 2);
    for (const auto& e : out) CHECK(e.stream == Stream::fixations);
}

TEST_CASE("property: per-stream seq is gap-free and t_ms nondecreasing") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        SessionConfig cfg;
        cfg.aois = AoiSet::grid(2, 2, cfg.geometry);
        gaze::testing::PlantedOptions o;
        o.noise_px = 0.5;
        o.dropouts = trial % 2 == 1;
        o.clusters = 10;
        const auto planted = gaze::testing::planted_stream(rng, o, cfg.geometry);
        std::array<std::uint64_t, kStreamCount> next{};
        std::array<double, kStreamCount> last_t;
        last_t.fill(-1e300);
        for (const auto& e : run_pipeline(cfg, planted.samples)) {
            const auto i = static_cast<std::size_t>(e.stream);
            CHECK(e.seq == next[i]);
            next[i] = e.seq + 1;
            CHECK(e.t_ms >= last_t[i]);
            last_t[i] = e.t_ms;
        }
        CHECK(next[static_cast<std::size_t>(Stream::samples)] == planted.samples.size());
        CHECK(next[static_cast<std::size_t>(Stream::fixations)] > 0);
    }
}

TEST_CASE("transition snapshots carry labels and mainseq appears once a fit exists") {
    std::mt19937_64 rng(3);
    SessionConfig cfg;
    cfg.aois = AoiSet::grid(1, 2, cfg.geometry);
    gaze::testing::PlantedOptions o;
    o.clusters = 14;
    const auto planted = gaze::testing::planted_stream(rng, o, cfg.geometry);
    std::size_t saccades = 0, mainseq = 0;
    json last_transitions;
    for (const auto& e : run_pipeline(cfg, planted.samples)) {
        if (e.stream == Stream::saccades) ++saccades;
        if (e.stream == Stream::mainseq) {
            ++mainseq;
            CHECK(e.payload.at("n_saccades").get<std::size_t>() >= 8);
        }
        if (e.stream == Stream::transitions) last_transitions = e.payload;
    }
    REQUIRE(saccades >= 8);
    CHECK(mainseq == saccades - 7);
    CHECK(last_transitions.at("labels") == json::array({"outside", "r0c0", "r0c1"}));
}

// ── Hub ──────────────────────────────────────────────────────────────────

TEST_CASE("two subscribers, one filtered to ripa: fixations reach only the other") {
    SessionConfig cfg;
    Hub hub;
    auto all = std::make_shared<Subscriber>(1 << 16);
    auto ripa = std::make_shared<Subscriber>(1 << 16);
    ripa->set_filter(StreamSet::from_json(json::array({"ripa"})));
    hub.add(all);
    hub.add(ripa);

    Pipeline p(cfg, "s", [&](const Envelope& e) { hub.publish(e); });
    for (const auto& s : two_fixations()) p.step(s);
    p.finish();
    p.publish_control({{"event", "finished"}}, 0.0);

    std::map<Stream, std::size_t> seen_all, seen_ripa;
    while (auto m = all->try_pop()) ++seen_all[parse_envelope(*m).stream];
    while (auto m = ripa->try_pop()) ++seen_ripa[parse_envelope(*m).stream];
    CHECK(seen_all[Stream::fixations] == 2);
    CHECK(seen_ripa.count(Stream::fixations) == 0);
    CHECK(seen_ripa[Stream::ripa] == seen_all[Stream::ripa]);
    CHECK(seen_ripa[Stream::ripa] > 0);
    // Control records reach every subscriber.
    CHECK(seen_ripa[Stream::control] == 1);
    CHECK(seen_all[Stream::control] == 1);
    CHECK(seen_ripa.size() == 2);
}

TEST_CASE("a full queue disconnects the subscriber under the disconnect policy") {
    Hub hub;
    int closes = 0;
    auto slow = std::make_shared<Subscriber>(3, nullptr, [&] { ++closes; });
    auto fast = std::make_shared<Subscriber>(100);
    hub.add(slow);
    hub.add(fast);
    for (std::uint64_t i = 0; i < 10; ++i) hub.publish(Envelope{1, "s", 0, Stream::samples, i, 0.0, {}});
    CHECK(slow->closed());
    CHECK(slow->close_reason() == "queue overflow");
    CHECK(closes == 1);
    CHECK(hub.size() == 1);
    CHECK(fast->queued() == 10);
    // Already-queued records stay poppable.
    CHECK(slow->queued() == 3);
}

TEST_CASE("the wait policy waits for a draining subscriber") {
    Hub hub;
    hub.set_policy(Backpressure::Wait, std::chrono::milliseconds(2000));
    auto sub = std::make_shared<Subscriber>(2);
    hub.add(sub);
    std::vector<std::uint64_t> got;
    std::thread reader([&] {
        while (got.size() < 50) {
            if (auto m = sub->pop(std::chrono::milliseconds(500))) got.push_back(parse_envelope(*m).seq);
            else break;
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
    });
    for (std::uint64_t i = 0; i < 50; ++i) hub.publish(Envelope{1, "s", 0, Stream::samples, i, 0.0, {}});
    reader.join();
    CHECK_FALSE(sub->closed());
    REQUIRE(got.size() == 50);
    for (std::uint64_t i = 0; i < 50; ++i) CHECK(got[i] == i);
}

TEST_CASE("the wait policy gives up on a stalled subscriber after the timeout") {
    Hub hub;
    hub.set_policy(Backpressure::Wait, std::chrono::milliseconds(50));
    auto stalled = std::make_shared<Subscriber>(1);
    hub.add(stalled);
    hub.publish(Envelope{1, "s", 0, Stream::samples, 0, 0.0, {}});
    const auto t0 = std::chrono::steady_clock::now();
    hub.publish(Envelope{1, "s", 0, Stream::samples, 1, 0.0, {}});
    const auto waited = std::chrono::steady_clock::now() - t0;
    CHECK(waited >= std::chrono::milliseconds(45));
    CHECK(waited < std::chrono::milliseconds(1000));
    CHECK(stalled->closed());
    CHECK(hub.size() == 0);
}

TEST_CASE("closed subscribers never see callbacks again") {
    int ready = 0;
    auto sub = std::make_shared<Subscriber>(10, [&] { ++ready; });
    Hub hub;
    hub.add(sub);
    hub.publish(Envelope{1, "s", 0, Stream::samples, 0, 0.0, {}});
    CHECK(ready == 1);
    sub->close("bye");
    sub->close("again");
    CHECK(sub->close_reason() == "bye");
    hub.publish(Envelope{1, "s", 0, Stream::samples, 1, 0.0, {}});
    CHECK(ready == 1);
    CHECK(hub.size() == 0);
}

// ── Batch ────────────────────────────────────────────────────────────────

TEST_CASE("batch of a two-fixation stream writes exactly two fixation records") {
    SessionConfig cfg;
    const auto dir = scratch("batch2");
    const auto summary = run_batch(cfg, two_fixations(), dir, "b");
    const auto lines = read_lines(dir / "fixations.jsonl");
    REQUIRE(lines.size() == 2);
    CHECK(parse_envelope(lines[0]).seq == 0);
    CHECK(parse_envelope(lines[1]).seq == 1);
    CHECK(summary.at("counts").at("fixations") == 2);
    CHECK(summary.at("counts").at("saccades") == 1);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(json::parse(slurp(dir / "summary.json")) == summary);
    CHECK_FALSE(fs::exists(dir / "control.jsonl"));
}

TEST_CASE("batch output matches the in-memory pipeline record for record") {
    std::mt19937_64 rng(8);
    SessionConfig cfg;
    cfg.aois = AoiSet::grid(2, 2, cfg.geometry);
    gaze::testing::PlantedOptions o;
    o.noise_px = 1.0;
    o.dropouts = true;
    const auto planted = gaze::testing::planted_stream(rng, o, cfg.geometry);
    const auto dir = scratch("batch_equiv");
    run_batch(cfg, planted.samples, dir, "id");
    std::map<Stream, std::vector<std::string>> expected;
    for (const auto& e : run_pipeline(cfg, planted.samples, "id")) expected[e.stream].push_back(serialize(e));
    for (Stream s : all_streams()) {
        if (s == Stream::control) continue;
        CHECK(read_lines(dir / (std::string(stream_name(s)) + ".jsonl")) == expected[s]);
    }
}

TEST_CASE("running batch twice is byte-identical apart from the session id") {
    std::mt19937_64 rng(21);
    SessionConfig cfg;
    cfg.aois = AoiSet::grid(3, 3, cfg.geometry);
    gaze::testing::PlantedOptions o;
    o.noise_px = 2.0;
    const auto planted = gaze::testing::planted_stream(rng, o, cfg.geometry);
    const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    run_batch(cfg, planted.samples, a, "first");
    run_batch(cfg, planted.samples, b, "first");
    run_batch(cfg, planted.samples, c, "second");
    for (Stream s : all_streams()) {
        if (s == Stream::control) continue;
        const auto name = std::string(stream_name(s)) + ".jsonl";
        CHECK(slurp(a / name) == slurp(b / name));
        const auto la = read_lines(a / name), lc = read_lines(c / name);
        REQUIRE(la.size() == lc.size());
        for (std::size_t i = 0; i < la.size(); ++i) {
            auto ea = parse_envelope(la[i]), ec = parse_envelope(lc[i]);
            CHECK(ec.session == "second");
            ec.session = ea.session;
            CHECK(ea == ec);
        }
    }
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
}

TEST_CASE("a disabled stream has no file, even from an earlier run") {
    SessionConfig cfg;
    const auto dir = scratch("disabled");
    run_batch(cfg, two_fixations(), dir, "b");
    CHECK(fs::exists(dir / "ripa.jsonl"));
    cfg.streams.erase(Stream::ripa);
    const auto summary = run_batch(cfg, two_fixations(), dir, "b");
    CHECK_FALSE(fs::exists(dir / "ripa.jsonl"));
    CHECK(fs::exists(dir / "fixations.jsonl"));
    CHECK_FALSE(summary.at("counts").contains("ripa"));
}

TEST_CASE("an unwritable output path fails before processing") {
    const auto dir = scratch("unwritable");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    SessionConfig cfg;
    CHECK_THROWS_AS(run_batch(cfg, two_fixations(), dir / "file" / "out", "b"), OutputError);
}
