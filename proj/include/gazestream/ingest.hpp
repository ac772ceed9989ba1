#pragma once

// Declarative parsing of recorded eye-tracking files.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gazestream/core.hpp"

namespace gaze {

/// A column referenced by header name or by 0-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

enum class TimeUnit { Seconds, Milliseconds, Microseconds };
enum class PupilUnit { Millimetres, Arbitrary };
enum class GazeUnit { Pixels, Normalized };

/// Row validity predicate. Applied to the text of the validity column.
struct ValidityRule {
    enum class Op { NonEmpty, Eq, Ne, Lt, Le, Gt, Ge };
    Op op = Op::NonEmpty;
    std::string operand;

    /// Parses "non-empty", "== 1", "!= 0", ">= 0.5", ...
    static ValidityRule parse(const std::string& text);
    bool accepts(const std::string& cell) const;
};

struct ColumnMap {
    std::string format_name = "custom";
    char delimiter = ',';
    bool has_header = true;

    ColumnRef t;
    ColumnRef x;
    ColumnRef y;
    std::optional<ColumnRef> pupil_left;
    std::optional<ColumnRef> pupil_right;
    std::optional<ColumnRef> validity;

    TimeUnit time_unit = TimeUnit::Milliseconds;
    PupilUnit pupil_unit = PupilUnit::Millimetres;
    GazeUnit gaze_unit = GazeUnit::Pixels;
    ValidityRule validity_rule;

    /// Fraction of rows allowed to be unparseable before ingestion fails.
    double bad_row_budget = 0.01;

    bool has_pupil() const { return pupil_left.has_value() || pupil_right.has_value(); }

    /// Built-in presets ("driving-sim", "visual-scanning"). Their column
    /// bindings are placeholders to be overridden for a local copy.
    static ColumnMap preset(const std::string& name);
    static ColumnMap from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

class IngestError : public std::runtime_error {
public:
    IngestError(const std::string& what, std::size_t row)
        : std::runtime_error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class EmptyStream : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParseOptions {
    /// Needed only for GazeUnit::Normalized, to scale to pixels.
    std::optional<Geometry> geometry;
};

/// Parse a delimiter-separated file into time-ordered samples.
///
/// Equal timestamps collapse to the last occurrence; a decreasing
/// timestamp raises MalformedStream. Rows failing the validity rule are kept
/// with valid=false. Rows whose timestamp cannot be parsed count against the
/// bad-row budget and are skipped.
std::vector<GazeSample> parse(const std::filesystem::path& path, const ColumnMap& map,
                              const ParseOptions& opts = {});

/// Same as parse(), reading from an in-memory buffer.
std::vector<GazeSample> parse_text(const std::string& text, const ColumnMap& map,
                                   const ParseOptions& opts = {});

}  // namespace gaze
