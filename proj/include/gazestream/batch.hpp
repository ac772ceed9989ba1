#pragma once

// Headless run: every enabled measure stream to <out>/<stream>.jsonl.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazestream/core.hpp"
#include "gazestream/session_config.hpp"

namespace gaze {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Processes `samples` at full speed and writes one JSONL file per enabled
/// stream plus summary.json. Throws OutputError if `out_dir` is unwritable,
/// before any processing. Returns the summary document.
nlohmann::json run_batch(const SessionConfig& cfg, const std::vector<GazeSample>& samples,
                         const std::filesystem::path& out_dir, const std::string& session_id);

}  // namespace gaze
