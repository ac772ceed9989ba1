// gazestream: replay recorded eye-tracking data as live measure streams.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "gazestream/batch.hpp"
#include "gazestream/ingest.hpp"
#include "gazestream/live_session.hpp"
#include "gazestream/session_config.hpp"
#include "gazestream/ws_server.hpp"

using namespace gaze;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct Overrides {
    std::optional<double> ivt_threshold;
    std::optional<double> min_fixation_ms;
    std::optional<double> max_gap_ms;
    std::optional<double> min_amplitude;
    std::optional<std::size_t> sg_window;
    std::optional<std::size_t> sg_order;
    std::optional<double> baseline_ms;
    std::optional<double> gap_ms;
    bool exclude_self = false;
    bool population_std = false;
    std::optional<std::string> speed;
    std::optional<std::uint16_t> port;
    std::vector<std::string> streams;

    void attach(CLI::App* cmd) {
        cmd->add_option("--ivt-threshold", ivt_threshold, "Saccade velocity threshold (deg/s)");
        cmd->add_option("--min-fixation-ms", min_fixation_ms, "Shortest retained fixation (ms)");
        cmd->add_option("--max-gap-ms", max_gap_ms, "Longest interpolated gaze dropout (ms)");
        cmd->add_option("--min-amplitude", min_amplitude, "Smallest saccade amplitude (deg)");
        cmd->add_option("--sg-window", sg_window, "Savitzky-Golay window length (odd)");
        cmd->add_option("--sg-order", sg_order, "Savitzky-Golay polynomial order");
        cmd->add_option("--baseline-ms", baseline_ms, "PCPD baseline window (ms)");
        cmd->add_option("--gap-ms", gap_ms, "Longest interpolated pupil dropout (ms)");
        cmd->add_flag("--exclude-self", exclude_self, "Drop self-transitions from the AOI matrix");
        cmd->add_flag("--population-std", population_std, "Use population std for coefficient K");
        cmd->add_option("--speed", speed, "Replay speed factor or 'max'");
        cmd->add_option("--streams", streams, "Enabled streams (default: all)")->delimiter(',');
    }

    void apply(SessionConfig& c) const {
        if (ivt_threshold) c.ivt.velocity_threshold = *ivt_threshold;
        if (min_fixation_ms) c.ivt.min_fixation_duration = *min_fixation_ms;
        if (max_gap_ms) c.ivt.max_gap_interpolation = *max_gap_ms;
        if (min_amplitude) c.ivt.min_saccade_amplitude = *min_amplitude;
        if (sg_window) c.pupil.sg_window = *sg_window;
        if (sg_order) c.pupil.sg_order = *sg_order;
        if (baseline_ms) c.pupil.baseline_ms = *baseline_ms;
        if (gap_ms) c.pupil.gap_ms = *gap_ms;
        if (exclude_self) c.exclude_self = true;
        if (population_std) c.k_std = StdKind::Population;
        if (speed) c.speed = speed_from_json(nlohmann::json(*speed));
        if (port) c.server.port = *port;
        if (!streams.empty()) c.streams = StreamSet::from_json(nlohmann::json(streams));
    }
};

struct Loaded {
    SessionConfig config;
    std::vector<GazeSample> samples;
};

Loaded load(const std::string& path, const Overrides& o) {
    Loaded l{SessionConfig::load(path), {}};
    o.apply(l.config);
    l.config.validate();
    ParseOptions opts;
    opts.geometry = l.config.geometry;
    l.samples = gaze::parse(l.config.input, l.config.column_map, opts);
    spdlog::info("loaded {} samples from {} ({:.1f} s)", l.samples.size(), l.config.input.string(),
                 (l.samples.back().t - l.samples.front().t) / 1000.0);
    return l;
}

int serve(const Loaded& l, const std::string& session_id, bool autostart, bool exit_when_done) {
    Hub hub;
    LiveSession session(l.config, l.samples, hub, LiveOptions{autostart, session_id});
    WsServer server(hub, l.config.server, [&](nlohmann::json cmd) { session.submit(std::move(cmd)); });
    server.start();
    session.start();
    spdlog::info("session {} {}", session.session_id(), autostart ? "running" : "paused; send {\"control\": {\"cmd\": \"resume\"}}");

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        if (exit_when_done && session.finished()) {
            // Give subscribers a moment to drain their queues.
            std::this_thread::sleep_for(std::chrono::milliseconds(500));
            break;
        }
    }
    session.stop();
    server.stop();
    spdlog::info("session {} stopped: {}", session.session_id(), session.status().dump());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real-time gaze analytics: replays eye-tracking recordings as measure streams"};
    app.require_subcommand(1);

    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->envname("GAZESTREAM_LOG_LEVEL");

    std::string config;
    std::string out_dir;
    std::string session_id;
    bool exit_when_done = false;
    Overrides over;

    auto* validate = app.add_subcommand("validate", "Check a session config and its input file");
    auto* batch = app.add_subcommand("batch", "Process at full speed and write one JSONL file per stream");
    auto* serve_cmd = app.add_subcommand("serve", "Serve a session over WebSocket, starting paused");
    auto* replay = app.add_subcommand("replay", "Serve a session and start replaying immediately");
    for (auto* cmd : {validate, batch, serve_cmd, replay}) {
        cmd->add_option("--config", config, "Session config (JSON)")->required()->check(CLI::ExistingFile);
        over.attach(cmd);
    }
    batch->add_option("--out", out_dir, "Output directory")->required();
    batch->add_option("--session-id", session_id, "Session id written into every record")->default_val("batch");
    for (auto* cmd : {serve_cmd, replay}) {
        cmd->add_option("--port", over.port, "Listen port")->envname("GAZESTREAM_PORT");
        cmd->add_option("--session-id", session_id, "Session id (default: random)");
    }
    replay->add_flag("--exit-when-done", exit_when_done, "Exit once the recording has been replayed");

    CLI11_PARSE(app, argc, argv);
    // stdout carries batch summaries; logs go to stderr.
    spdlog::set_default_logger(spdlog::stderr_color_mt("gazestream"));
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        const Loaded l = load(config, over);
        if (*validate) {
            std::cout << "ok: " << l.samples.size() << " samples, " << l.config.aois.aois().size() << " AOIs, streams "
                      << l.config.streams.to_json().dump() << "\n";
            return 0;
        }
        if (*batch) {
            const auto summary = run_batch(l.config, l.samples, out_dir, session_id);
            std::cout << summary.dump(2) << "\n";
            return 0;
        }
        return serve(l, session_id, replay->parsed(), exit_when_done);
    } catch (const ConfigError& e) {
        spdlog::error("config: {}", e.what());
        return 2;
    } catch (const IngestError& e) {
        spdlog::error("input: {}", e.what());
        return 3;
    } catch (const EmptyStream& e) {
        spdlog::error("input: {}", e.what());
        return 3;
    } catch (const MalformedStream& e) {
        spdlog::error("input: {}", e.what());
        return 3;
    } catch (const OutputError& e) {
        spdlog::error("output: {}", e.what());
        return 4;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
