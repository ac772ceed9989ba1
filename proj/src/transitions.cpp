#include "gazestream/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gaze {

AoiSet::AoiSet(std::vector<Aoi> aois) : aois_(std::move(aois)) {
    for (std::size_t i = 0; i < aois_.size(); ++i) {
        aois_[i].id = i + 1;
    }
}

void AoiSet::validate(const Geometry& geom) const {
    std::set<std::string> seen;
    for (const auto& a : aois_) {
        if (a.label.empty()) {
            throw ConfigError("AOI " + std::to_string(a.id) + " has an empty label");
        }
        if (a.label == "outside") {
            throw ConfigError("AOI label \"outside\" is reserved");
        }
        if (!seen.insert(a.label).second) {
            throw ConfigError("duplicate AOI label: " + a.label);
        }
        if (!(a.w > 0.0) || !(a.h > 0.0) || a.x < 0.0 || a.y < 0.0 ||
            a.x + a.w > geom.screen_width_px || a.y + a.h > geom.screen_height_px) {
            throw ConfigError("AOI rectangle out of screen bounds: " + a.label);
        }
    }
}

std::size_t AoiSet::hit(Point p) const {
    for (const auto& a : aois_) {
        if (a.contains(p)) {
            return a.id;
        }
    }
    return 0;
}

std::vector<std::string> AoiSet::labels() const {
    std::vector<std::string> out{"outside"};
    for (const auto& a : aois_) {
        out.push_back(a.label);
    }
    return out;
}

AoiSet AoiSet::grid(std::size_t rows, std::size_t cols, const Geometry& geom) {
    if (rows == 0 || cols == 0) {
        throw ConfigError("AOI grid needs at least one row and column");
    }
    std::vector<Aoi> aois;
    const double w = geom.screen_width_px / static_cast<double>(cols);
    const double h = geom.screen_height_px / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            Aoi a;
            a.label = "r" + std::to_string(r) + "c" + std::to_string(c);
            a.x = static_cast<double>(c) * w;
            a.y = static_cast<double>(r) * h;
            // Last row/column reach the screen edge exactly.
            a.w = (c + 1 == cols) ? geom.screen_width_px - a.x : w;
            a.h = (r + 1 == rows) ? geom.screen_height_px - a.y : h;
            aois.push_back(a);
        }
    }
    return AoiSet(std::move(aois));
}

AoiSet AoiSet::from_json(const nlohmann::json& j) {
    const nlohmann::json& list = j.is_object() ? j.at("aois") : j;
    if (!list.is_array()) {
        throw ConfigError("AOI file must be an array of {label, rect}");
    }
    std::vector<Aoi> aois;
    for (const auto& item : list) {
        Aoi a;
        a.label = item.at("label").get<std::string>();
        const auto& r = item.at("rect");
        if (!r.is_array() || r.size() != 4) {
            throw ConfigError("AOI rect must be [x, y, w, h]: " + a.label);
        }
        a.x = r[0].get<double>();
        a.y = r[1].get<double>();
        a.w = r[2].get<double>();
        a.h = r[3].get<double>();
        aois.push_back(a);
    }
    return AoiSet(std::move(aois));
}

nlohmann::json AoiSet::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : aois_) {
        out.push_back({{"label", a.label}, {"rect", {a.x, a.y, a.w, a.h}}});
    }
    return out;
}

// ── Entropy ──────────────────────────────────────────────────────────────

Entropies entropies(const std::vector<std::vector<std::uint64_t>>& counts,
                    const std::vector<std::uint64_t>& visits) {
    Entropies e;
    std::uint64_t total_visits = 0;
    for (auto v : visits) total_visits += v;
    if (total_visits == 0) {
        return e;
    }
    const double nv = static_cast<double>(total_visits);
    double hs = 0.0;
    for (auto v : visits) {
        if (v == 0) continue;
        const double p = static_cast<double>(v) / nv;
        hs -= p * std::log2(p);
    }
    e.stationary = hs;

    std::uint64_t total_transitions = 0;
    double ht = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::uint64_t row = 0;
        for (auto c : counts[i]) row += c;
        if (row == 0) continue;
        total_transitions += row;
        const double pi = static_cast<double>(visits[i]) / nv;
        double hrow = 0.0;
        for (auto c : counts[i]) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / static_cast<double>(row);
            hrow -= p * std::log2(p);
        }
        ht += pi * hrow;
    }
    if (total_transitions > 0) {
        e.transition = ht;
    }
    return e;
}

// ── TransitionMatrix ─────────────────────────────────────────────────────

TransitionMatrix::TransitionMatrix(std::size_t n, std::vector<std::string> labels, bool exclude_self)
    : n_(n),
      labels_(std::move(labels)),
      exclude_self_(exclude_self),
      counts_(n, std::vector<std::uint64_t>(n, 0)),
      visits_(n, 0) {
    if (labels_.size() != n_) {
        throw ConfigError("transition matrix needs one label per AOI");
    }
}

void TransitionMatrix::update(std::size_t curr) {
    update(prev_, curr);
}

void TransitionMatrix::update(std::optional<std::size_t> prev, std::size_t curr) {
    if (curr >= n_) {
        throw ConfigError("AOI id out of range: " + std::to_string(curr));
    }
    ++visits_[curr];
    ++fixations_;
    if (prev && *prev < n_ && !(exclude_self_ && *prev == curr)) {
        ++counts_[*prev][curr];
        ++transitions_;
    }
    prev_ = curr;
}

void TransitionMatrix::reset() {
    for (auto& row : counts_) std::fill(row.begin(), row.end(), 0);
    std::fill(visits_.begin(), visits_.end(), 0);
    fixations_ = 0;
    transitions_ = 0;
    prev_.reset();
}

TransitionSnapshot TransitionMatrix::snapshot() const {
    TransitionSnapshot s;
    s.n = n_;
    s.labels = labels_;
    s.counts = counts_;
    s.probs.assign(n_, std::vector<double>(n_, 0.0));
    s.row_visited.assign(n_, false);
    s.pi.assign(n_, 0.0);
    s.fixations = fixations_;
    s.transitions = transitions_;
    for (std::size_t i = 0; i < n_; ++i) {
        std::uint64_t row = 0;
        for (auto c : counts_[i]) row += c;
        if (row > 0) {
            s.row_visited[i] = true;
            for (std::size_t j = 0; j < n_; ++j) {
                s.probs[i][j] = static_cast<double>(counts_[i][j]) / static_cast<double>(row);
            }
        }
        if (fixations_ > 0) {
            s.pi[i] = static_cast<double>(visits_[i]) / static_cast<double>(fixations_);
        }
    }
    s.entropy = entropy();
    return s;
}

}  // namespace gaze
