#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

namespace gaze {

enum class StdKind { Sample, Population };

/// Welford accumulator for mean and variance.
class RunningStats {
public:
    void push(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    /// Chan et al. parallel combination.
    void merge(const RunningStats& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double delta = o.mean_ - mean_;
        const double n = na + nb;
        mean_ += delta * nb / n;
        m2_ += o.m2_ + delta * delta * na * nb / n;
        n_ += o.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double m2() const { return m2_; }

    /// nullopt while undefined (n < 2 for sample, n < 1 for population).
    std::optional<double> variance(StdKind kind = StdKind::Sample) const {
        if (kind == StdKind::Sample) {
            if (n_ < 2) return std::nullopt;
            return m2_ / static_cast<double>(n_ - 1);
        }
        if (n_ < 1) return std::nullopt;
        return m2_ / static_cast<double>(n_);
    }

    std::optional<double> stddev(StdKind kind = StdKind::Sample) const {
        const auto v = variance(kind);
        if (!v) return std::nullopt;
        return std::sqrt(*v);
    }

    void reset() { *this = RunningStats{}; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace gaze
