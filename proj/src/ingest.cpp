#include "gazestream/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gaze {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(first, last - first + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

// Splits one line, honouring double-quoted fields that contain the delimiter.
std::vector<std::string> split_row(std::string_view line, char delim) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            cur.push_back(c);
        } else if (c == delim && !quoted) {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

std::optional<double> to_double(const std::string& s) {
    if (s.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') {
        ++begin;
    }
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

double time_factor(TimeUnit u) {
    switch (u) {
        case TimeUnit::Seconds: return 1000.0;
        case TimeUnit::Milliseconds: return 1.0;
        case TimeUnit::Microseconds: return 0.001;
    }
    return 1.0;
}

ColumnRef ref_from_json(const nlohmann::json& j, const std::string& key) {
    if (j.is_string()) {
        return j.get<std::string>();
    }
    if (j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0)) {
        return static_cast<std::size_t>(j.get<long long>());
    }
    throw ConfigError("column binding \"" + key + "\" must be a name or a non-negative index");
}

nlohmann::json ref_to_json(const ColumnRef& r) {
    if (const auto* s = std::get_if<std::string>(&r)) {
        return *s;
    }
    return std::get<std::size_t>(r);
}

std::string describe(const ColumnRef& r) {
    if (const auto* s = std::get_if<std::string>(&r)) {
        return *s;
    }
    return "#" + std::to_string(std::get<std::size_t>(r));
}

struct Resolved {
    std::size_t t = 0, x = 0, y = 0;
    std::optional<std::size_t> pl, pr, valid;
};

std::size_t resolve_one(const ColumnRef& ref, const std::string& binding,
                        const std::vector<std::string>& header, std::size_t width) {
    if (const auto* name = std::get_if<std::string>(&ref)) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == *name) {
                return i;
            }
        }
        throw ConfigError("missing column for \"" + binding + "\": " + *name);
    }
    const auto idx = std::get<std::size_t>(ref);
    if (idx >= width) {
        throw ConfigError("missing column for \"" + binding + "\": " + describe(ref));
    }
    return idx;
}

}  // namespace

// ── ValidityRule ─────────────────────────────────────────────────────────

ValidityRule ValidityRule::parse(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty() || s == "non-empty") {
        return {Op::NonEmpty, {}};
    }
    static const std::pair<const char*, Op> ops[] = {
        {"==", Op::Eq}, {"!=", Op::Ne}, {"<=", Op::Le}, {">=", Op::Ge}, {"<", Op::Lt}, {">", Op::Gt},
    };
    for (const auto& [tok, op] : ops) {
        if (s.rfind(tok, 0) == 0) {
            std::string operand = trim(s.substr(std::string_view(tok).size()));
            if (operand.empty()) {
                throw ConfigError("validity_rule is missing an operand: " + text);
            }
            return {op, operand};
        }
    }
    throw ConfigError("unrecognized validity_rule: " + text);
}

bool ValidityRule::accepts(const std::string& cell) const {
    if (op == Op::NonEmpty) {
        return !cell.empty();
    }
    const auto lhs = to_double(cell);
    const auto rhs = to_double(operand);
    if (lhs && rhs) {
        switch (op) {
            case Op::Eq: return *lhs == *rhs;
            case Op::Ne: return *lhs != *rhs;
            case Op::Lt: return *lhs < *rhs;
            case Op::Le: return *lhs <= *rhs;
            case Op::Gt: return *lhs > *rhs;
            case Op::Ge: return *lhs >= *rhs;
            case Op::NonEmpty: break;
        }
        return false;
    }
    // Non-numeric comparison: only equality makes sense.
    if (op == Op::Eq) return cell == operand;
    if (op == Op::Ne) return cell != operand;
    return false;
}

// ── ColumnMap ────────────────────────────────────────────────────────────

ColumnMap ColumnMap::preset(const std::string& name) {
    ColumnMap m;
    if (name == "driving-sim") {
        m.format_name = "driving-sim";
        m.delimiter = ',';
        m.t = std::string("timestamp");
        m.x = std::string("gaze_x");
        m.y = std::string("gaze_y");
        m.pupil_left = std::string("pupil_left");
        m.pupil_right = std::string("pupil_right");
        m.time_unit = TimeUnit::Seconds;
        m.pupil_unit = PupilUnit::Arbitrary;
        return m;
    }
    if (name == "visual-scanning") {
        m.format_name = "visual-scanning";
        m.delimiter = '\t';
        m.t = std::string("time");
        m.x = std::string("x");
        m.y = std::string("y");
        m.pupil_left = std::string("pupil");
        m.validity = std::string("valid");
        m.validity_rule = ValidityRule::parse("== 1");
        m.time_unit = TimeUnit::Milliseconds;
        m.pupil_unit = PupilUnit::Arbitrary;
        return m;
    }
    throw ConfigError("unknown column map preset: " + name);
}

ColumnMap ColumnMap::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("column_map must be an object");
    }
    ColumnMap m;
    bool from_preset = false;
    if (j.contains("preset")) {
        m = preset(j.at("preset").get<std::string>());
        from_preset = true;
    }
    if (j.contains("format_name")) m.format_name = j.at("format_name").get<std::string>();
    if (j.contains("delimiter")) {
        const auto d = j.at("delimiter").get<std::string>();
        if (d == "tab" || d == "\\t" || d == "\t") {
            m.delimiter = '\t';
        } else if (d.size() == 1) {
            m.delimiter = d[0];
        } else {
            throw ConfigError("delimiter must be a single character or \"tab\"");
        }
    }
    if (j.contains("has_header")) m.has_header = j.at("has_header").get<bool>();

    const auto cols = j.value("columns", nlohmann::json::object());
    for (const char* key : {"t", "x", "y"}) {
        if (cols.contains(key)) {
            const ColumnRef r = ref_from_json(cols.at(key), key);
            if (std::string_view(key) == "t") m.t = r;
            if (std::string_view(key) == "x") m.x = r;
            if (std::string_view(key) == "y") m.y = r;
        } else if (!from_preset) {
            throw ConfigError(std::string("missing mandatory column binding \"") + key + "\"");
        }
    }
    auto optional_ref = [&](const char* key, std::optional<ColumnRef>& slot) {
        if (!cols.contains(key)) return;
        if (cols.at(key).is_null()) {
            slot.reset();
        } else {
            slot = ref_from_json(cols.at(key), key);
        }
    };
    optional_ref("pupil_left", m.pupil_left);
    optional_ref("pupil_right", m.pupil_right);
    optional_ref("validity", m.validity);

    if (j.contains("time_unit")) {
        const auto u = j.at("time_unit").get<std::string>();
        if (u == "s") m.time_unit = TimeUnit::Seconds;
        else if (u == "ms") m.time_unit = TimeUnit::Milliseconds;
        else if (u == "us") m.time_unit = TimeUnit::Microseconds;
        else throw ConfigError("time_unit must be one of s, ms, us");
    }
    if (j.contains("pupil_unit")) {
        const auto u = j.at("pupil_unit").get<std::string>();
        if (u == "mm") m.pupil_unit = PupilUnit::Millimetres;
        else if (u == "arbitrary") m.pupil_unit = PupilUnit::Arbitrary;
        else throw ConfigError("pupil_unit must be mm or arbitrary");
    }
    if (j.contains("gaze_unit")) {
        const auto u = j.at("gaze_unit").get<std::string>();
        if (u == "px") m.gaze_unit = GazeUnit::Pixels;
        else if (u == "normalized") m.gaze_unit = GazeUnit::Normalized;
        else throw ConfigError("gaze_unit must be px or normalized");
    }
    if (j.contains("validity_rule")) {
        m.validity_rule = ValidityRule::parse(j.at("validity_rule").get<std::string>());
    }
    if (j.contains("bad_row_budget")) {
        m.bad_row_budget = j.at("bad_row_budget").get<double>();
        if (m.bad_row_budget < 0.0 || m.bad_row_budget > 1.0) {
            throw ConfigError("bad_row_budget must be within [0, 1]");
        }
    }
    return m;
}

nlohmann::json ColumnMap::to_json() const {
    nlohmann::json cols{{"t", ref_to_json(t)}, {"x", ref_to_json(x)}, {"y", ref_to_json(y)}};
    if (pupil_left) cols["pupil_left"] = ref_to_json(*pupil_left);
    if (pupil_right) cols["pupil_right"] = ref_to_json(*pupil_right);
    if (validity) cols["validity"] = ref_to_json(*validity);
    static const char* rule_ops[] = {"non-empty", "==", "!=", "<", "<=", ">", ">="};
    std::string rule = rule_ops[static_cast<int>(validity_rule.op)];
    if (validity_rule.op != ValidityRule::Op::NonEmpty) rule += " " + validity_rule.operand;
    return {
        {"format_name", format_name},
        {"delimiter", delimiter == '\t' ? std::string("tab") : std::string(1, delimiter)},
        {"has_header", has_header},
        {"columns", cols},
        {"time_unit", time_unit == TimeUnit::Seconds ? "s" : time_unit == TimeUnit::Milliseconds ? "ms" : "us"},
        {"pupil_unit", pupil_unit == PupilUnit::Millimetres ? "mm" : "arbitrary"},
        {"gaze_unit", gaze_unit == GazeUnit::Pixels ? "px" : "normalized"},
        {"validity_rule", rule},
        {"bad_row_budget", bad_row_budget},
    };
}

// ── parse ────────────────────────────────────────────────────────────────

std::vector<GazeSample> parse(const std::filesystem::path& path, const ColumnMap& map,
                              const ParseOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError("cannot open input file " + path.string(), 0);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), map, opts);
}

std::vector<GazeSample> parse_text(const std::string& text, const ColumnMap& map,
                                   const ParseOptions& opts) {
    if (map.gaze_unit == GazeUnit::Normalized && !opts.geometry) {
        throw ConfigError("normalized gaze coordinates need a geometry");
    }

    // Collect non-empty lines with their 1-based line numbers.
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    {
        std::size_t lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            ++lineno;
            std::string_view line(text.data() + pos, nl - pos);
            if (!trim(line).empty() && line.front() != '#') {
                lines.emplace_back(lineno, line);
            }
            pos = nl + 1;
        }
    }

    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (map.has_header) {
        if (lines.empty()) {
            throw EmptyStream("input has no header row");
        }
        header = split_row(lines[0].second, map.delimiter);
        first_data = 1;
    }
    if (lines.size() <= first_data) {
        throw EmptyStream("input contains no data rows");
    }
    const std::size_t width =
        map.has_header ? header.size() : split_row(lines[first_data].second, map.delimiter).size();

    Resolved cols;
    cols.t = resolve_one(map.t, "t", header, width);
    cols.x = resolve_one(map.x, "x", header, width);
    cols.y = resolve_one(map.y, "y", header, width);
    if (map.pupil_left) cols.pl = resolve_one(*map.pupil_left, "pupil_left", header, width);
    if (map.pupil_right) cols.pr = resolve_one(*map.pupil_right, "pupil_right", header, width);
    if (map.validity) cols.valid = resolve_one(*map.validity, "validity", header, width);

    const std::size_t total_rows = lines.size() - first_data;
    const double allowed_bad = map.bad_row_budget * static_cast<double>(total_rows);
    const double tf = time_factor(map.time_unit);
    const double sx = map.gaze_unit == GazeUnit::Normalized ? opts.geometry->screen_width_px : 1.0;
    const double sy = map.gaze_unit == GazeUnit::Normalized ? opts.geometry->screen_height_px : 1.0;

    std::vector<GazeSample> out;
    out.reserve(total_rows);
    std::size_t bad = 0;
    for (std::size_t li = first_data; li < lines.size(); ++li) {
        const auto [lineno, line] = lines[li];
        const auto cells = split_row(line, map.delimiter);
        auto cell = [&](std::size_t i) -> const std::string& {
            static const std::string empty;
            return i < cells.size() ? cells[i] : empty;
        };

        const auto t = to_double(cell(cols.t));
        if (!t) {
            ++bad;
            if (static_cast<double>(bad) > allowed_bad) {
                throw IngestError("unparseable row beyond bad-row budget", lineno);
            }
            continue;
        }

        GazeSample s;
        s.t = *t * tf;
        const auto x = to_double(cell(cols.x));
        const auto y = to_double(cell(cols.y));
        s.valid = x.has_value() && y.has_value();
        if (cols.valid) {
            s.valid = s.valid && map.validity_rule.accepts(cell(*cols.valid));
        }
        s.x = x.value_or(0.0) * sx;
        s.y = y.value_or(0.0) * sy;
        if (cols.pl) s.pupil_left = to_double(cell(*cols.pl));
        if (cols.pr) s.pupil_right = to_double(cell(*cols.pr));

        if (!out.empty()) {
            if (s.t < out.back().t) {
                throw MalformedStream("decreasing timestamp at row " + std::to_string(lineno));
            }
            if (s.t == out.back().t) {
                out.back() = s;
                continue;
            }
        }
        out.push_back(s);
    }
    if (out.empty()) {
        throw EmptyStream("input contains no parseable rows");
    }
    return out;
}

}  // namespace gaze
