#pragma once

// Areas of interest and the gaze transition matrix between them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazestream/core.hpp"

namespace gaze {

struct Aoi {
    std::size_t id = 0;  // >= 1; 0 is "outside"
    std::string label;
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;

    /// Closed on the left/top edges, open on the right/bottom edges.
    bool contains(Point p) const { return p.x >= x && p.x < x + w && p.y >= y && p.y < y + h; }
};

class AoiSet {
public:
    AoiSet() = default;
    /// Ids are assigned 1..n in declaration order.
    explicit AoiSet(std::vector<Aoi> aois);

    /// Validates unique labels and on-screen rectangles.
    void validate(const Geometry& geom) const;

    /// First declared AOI containing `p`, else 0.
    std::size_t hit(Point p) const;

    std::size_t size_with_outside() const { return aois_.size() + 1; }
    const std::vector<Aoi>& aois() const { return aois_; }
    /// Labels indexed by id, "outside" at 0.
    std::vector<std::string> labels() const;

    /// rows x cols equal cells covering the screen, labelled "r<i>c<j>".
    static AoiSet grid(std::size_t rows, std::size_t cols, const Geometry& geom);
    static AoiSet from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    std::vector<Aoi> aois_;
};

/// aoi_hit: id of the first declared AOI containing `centroid`; 0 if none.
inline std::size_t aoi_hit(Point centroid, const AoiSet& aois) { return aois.hit(centroid); }

struct Entropies {
    std::optional<double> stationary;  // bits; needs >= 1 fixation
    std::optional<double> transition;  // bits; needs >= 1 transition
};

struct TransitionSnapshot {
    std::size_t n = 0;
    std::vector<std::string> labels;
    std::vector<std::vector<std::uint64_t>> counts;
    std::vector<std::vector<double>> probs;  // row-normalised; all-zero rows unvisited
    std::vector<bool> row_visited;
    std::vector<double> pi;                  // empirical fixation proportions
    std::uint64_t fixations = 0;
    std::uint64_t transitions = 0;
    Entropies entropy;
};

/// Entropies straight from counts and per-AOI fixation tallies.
/// H_s = -sum pi log2 pi, H_t = -sum_i pi_i sum_j p_ij log2 p_ij.
Entropies entropies(const std::vector<std::vector<std::uint64_t>>& counts,
                    const std::vector<std::uint64_t>& visits);

class TransitionMatrix {
public:
    TransitionMatrix(std::size_t n, std::vector<std::string> labels, bool exclude_self = false);

    /// Record a fixation on `curr`; counts prev -> curr if a previous fixation
    /// exists in the current run.
    void update(std::size_t curr);
    /// Explicit form: prev nullopt means "no pair".
    void update(std::optional<std::size_t> prev, std::size_t curr);
    /// Gap: the next fixation starts a new pairing.
    void on_gap() { prev_.reset(); }
    void reset();

    std::optional<std::size_t> previous() const { return prev_; }
    TransitionSnapshot snapshot() const;
    Entropies entropy() const { return entropies(counts_, visits_); }

private:
    std::size_t n_;
    std::vector<std::string> labels_;
    bool exclude_self_;
    std::vector<std::vector<std::uint64_t>> counts_;
    std::vector<std::uint64_t> visits_;
    std::uint64_t fixations_ = 0;
    std::uint64_t transitions_ = 0;
    std::optional<std::size_t> prev_;
};

}  // namespace gaze
