#include "gazestream/batch.hpp"

#include <array>
#include <fstream>
#include <memory>

#include "gazestream/pipeline.hpp"

namespace gaze {

nlohmann::json run_batch(const SessionConfig& cfg, const std::vector<GazeSample>& samples,
                         const std::filesystem::path& out_dir, const std::string& session_id) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw OutputError("cannot create output directory " + out_dir.string());
    }

    std::array<std::unique_ptr<std::ofstream>, kStreamCount> files;
    for (Stream s : all_streams()) {
        const auto path = out_dir / (std::string(stream_name(s)) + ".jsonl");
        if (s == Stream::control || !cfg.streams.contains(s)) {
            std::filesystem::remove(path, ec);  // stale file from an earlier run
            continue;
        }
        auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
        if (!*f) {
            throw OutputError("cannot write " + path.string());
        }
        files[static_cast<std::size_t>(s)] = std::move(f);
    }

    Pipeline pipeline(cfg, session_id, [&](const Envelope& e) {
        auto& f = files[static_cast<std::size_t>(e.stream)];
        if (!f) return;
        *f << serialize(e) << '\n';
    });
    for (const auto& s : samples) pipeline.step(s);
    pipeline.finish();

    for (Stream s : all_streams()) {
        auto& f = files[static_cast<std::size_t>(s)];
        if (!f) continue;
        f->flush();
        if (!*f) throw OutputError("write failed for stream " + std::string(stream_name(s)));
    }

    const auto summary = pipeline.summary();
    std::ofstream out(out_dir / "summary.json", std::ios::binary | std::ios::trunc);
    out << summary.dump(2) << '\n';
    if (!out) throw OutputError("cannot write summary.json");
    return summary;
}

}  // namespace gaze
